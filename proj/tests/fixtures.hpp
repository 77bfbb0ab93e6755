#ifndef EVENTCHRON_TEST_FIXTURES_HPP
#define EVENTCHRON_TEST_FIXTURES_HPP

#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include "eventchron/bayesnet.hpp"
#include "eventchron/dataset.hpp"

namespace fixtures {

inline void append_rows(std::ostringstream& out, const std::string& row, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) out << row << '\n';
}

/// Two ndhD sites with the joint counts of the 116494/116785 contingency
/// matrix, plus rows where one site is unobserved.
inline eventchron::data::EventMatrix ndhd_pair() {
    std::ostringstream csv;
    csv << "ndhD_116494,ndhD_116785\n";
    append_rows(csv, "False,False", 82);
    append_rows(csv, "False,True", 144);
    append_rows(csv, "True,False", 39);
    append_rows(csv, "True,True", 304);
    append_rows(csv, "NaN,True", 11);
    append_rows(csv, "True,NaN", 6);
    std::istringstream in(csv.str());
    return eventchron::data::parse_reads(in, {}, "ndhd-pair-fixture");
}

/// Five ndhD sites. ndhD_116290 occurs alone 8 times, with 116494 only 26
/// times and with 116494 and 116785 (nothing else) 262 times; the other
/// rows are distractors, some of them incomplete.
inline eventchron::data::EventMatrix ndhd_tallies() {
    std::ostringstream csv;
    csv << "ndhD_116281,ndhD_116290,ndhD_116494,ndhD_116785,ndhD_117166\n";
    append_rows(csv, "False,True,False,False,False", 8);
    append_rows(csv, "False,True,True,False,False", 26);
    append_rows(csv, "False,True,True,True,False", 262);
    append_rows(csv, "True,True,True,True,True", 51);
    append_rows(csv, "False,True,False,True,False", 4);
    append_rows(csv, "False,False,True,False,False", 120);
    append_rows(csv, "False,False,False,False,False", 40);
    append_rows(csv, "NaN,True,False,False,False", 9);
    append_rows(csv, "False,True,True,NaN,NaN", 13);
    append_rows(csv, "Err,True,False,False,True", 3);
    std::istringstream in(csv.str());
    return eventchron::data::parse_reads(in, {}, "ndhd-tally-fixture");
}

/// A -> B with P(A=1) = 0.5, P(B=1 | A=0) = 0.2, P(B=1 | A=1) = 0.9.
inline eventchron::bn::DiscreteBayesNet two_node_chain() {
    using namespace eventchron::bn;
    Dag g({"A", "B"}, std::vector<Edge>{{0, 1}});
    return DiscreteBayesNet(g, {Cpt{0, {}, {0.5}}, Cpt{1, {0}, {0.2, 0.9}}});
}

}  // namespace fixtures

#endif  // EVENTCHRON_TEST_FIXTURES_HPP
