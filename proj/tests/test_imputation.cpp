#include <gtest/gtest.h>

#include <sstream>

#include "eventchron/discovery.hpp"
#include "eventchron/error.hpp"
#include "eventchron/imputation.hpp"
#include "eventchron/pipeline.hpp"

using namespace eventchron;
using bn::Dag;
using bn::Edge;
using data::Cell;

namespace {

data::EventMatrix parse(const std::string& text) {
    std::istringstream in(text);
    return data::parse_reads(in);
}

discovery::Learner fixed_learner(Dag g) {
    return [g](const data::EventMatrix&, std::uint64_t) { return g; };
}

const discovery::Learner hc = discovery::make_learner(discovery::Algorithm::Hc);

}  // namespace

TEST(InitialImpute, ModeMajority) {
    const auto m = parse("a\nTrue\nTrue\nNaN\nFalse\n");
    EXPECT_TRUE(imputation::column_mode(m, 0));
    const auto done = imputation::initial_impute(m);
    EXPECT_EQ(done.at(2, 0), Cell::One);
}

TEST(InitialImpute, ModeTieGivesZero) {
    const auto m = parse("a\nTrue\nFalse\nNaN\n");
    EXPECT_FALSE(imputation::column_mode(m, 0));
    EXPECT_EQ(imputation::initial_impute(m).at(2, 0), Cell::Zero);
}

TEST(InitialImpute, CompleteMatrixUnchanged) {
    const auto m = parse("a,b\nTrue,False\nFalse,False\n");
    EXPECT_EQ(imputation::initial_impute(m), m);
    EXPECT_EQ(imputation::initial_impute(m, imputation::InitialMethod::RoundRobin), m);
}

TEST(InitialImpute, FullyMissingColumnRejected) {
    const auto m = parse("a,b\nTrue,NaN\nFalse,NaN\n");
    EXPECT_THROW(imputation::initial_impute(m), ValidationError);
    EXPECT_THROW(imputation::initial_impute(m, imputation::InitialMethod::RoundRobin), ValidationError);
}

TEST(InitialImpute, RoundRobinUsesNeighbours) {
    // b copies a; the missing b in a row with a = 1 follows its neighbours
    // even though b's mode is 0.
    std::ostringstream csv;
    csv << "a,b\n";
    for (int i = 0; i < 30; ++i) csv << "True,True\n";
    for (int i = 0; i < 60; ++i) csv << "False,False\n";
    csv << "True,NaN\n";
    const auto m = parse(csv.str());
    EXPECT_EQ(imputation::initial_impute(m).at(90, 1), Cell::Zero);
    EXPECT_EQ(imputation::initial_impute(m, imputation::InitialMethod::RoundRobin).at(90, 1), Cell::One);
}

TEST(InitialImpute, ParseMethod) {
    EXPECT_EQ(imputation::parse_initial_method("round-robin"), imputation::InitialMethod::RoundRobin);
    EXPECT_EQ(imputation::parse_initial_method("mode"), imputation::InitialMethod::Mode);
    EXPECT_THROW(imputation::parse_initial_method("mice"), ValidationError);
}

TEST(EdgeChange, SetArithmetic) {
    const std::vector<std::string> nodes{"a", "b", "c"};
    const Dag g1(nodes, std::vector<Edge>{{0, 1}});
    const Dag g2(nodes, std::vector<Edge>{{1, 2}});
    EXPECT_EQ(imputation::edge_change_fraction(g1, g1), 0.0);
    EXPECT_EQ(imputation::edge_change_fraction(g1, g2), 1.0);
    EXPECT_EQ(imputation::edge_change_fraction(Dag::empty(nodes), Dag::empty(nodes)), 0.0);
    EXPECT_THROW(imputation::edge_change_fraction(g1, Dag::empty({"a", "b"})), ValidationError);
}

TEST(EdgeChange, OneReversalAmongTen) {
    // Ten-edge chain on eleven nodes; the second graph reverses the last edge.
    std::vector<std::string> nodes;
    for (int i = 0; i < 11; ++i) nodes.push_back("n" + std::to_string(i));
    std::vector<Edge> e1, e2;
    for (std::size_t i = 0; i < 10; ++i) {
        e1.push_back({i, i + 1});
        e2.push_back(i == 9 ? Edge{10, 9} : Edge{i, i + 1});
    }
    EXPECT_DOUBLE_EQ(imputation::edge_change_fraction(Dag(nodes, e1), Dag(nodes, e2)), 2.0 / 11.0);
}

TEST(Em, CompleteMatrixIsOneIteration) {
    const auto m = bn::sample(pipeline::preset_network("chain"), 1000, 3);
    const auto r = imputation::em_impute(m, hc);
    EXPECT_EQ(r.iterations, 1u);
    EXPECT_EQ(r.edge_change_history, (std::vector<double>{0.0}));
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.completed, m);
    EXPECT_EQ(r.model.dag(), discovery::hc_learn(m));
}

TEST(Em, TieImputesColumnMode) {
    // Under b -> a the stratum b = 1 holds a = {1, 1, 0} plus the imputed
    // cell; mode imputation makes it 2:2, so P(a=1 | b=1) = 0.5 exactly.
    const auto m = parse("a,b\nTrue,True\nTrue,True\nFalse,True\nNaN,True\nFalse,False\nFalse,False\nFalse,False\n");
    const Dag g({"a", "b"}, std::vector<Edge>{{1, 0}});
    const auto r = imputation::em_impute(m, fixed_learner(g));
    EXPECT_NEAR(r.model.cpt(0).p1[1], 0.5, 0.0);
    EXPECT_EQ(r.completed.at(3, 0), Cell::Zero);
}

TEST(Em, ObservedCellsNeverChange) {
    pipeline::ScenarioSpec spec;
    spec.preset = "diamond";
    spec.rows = 2000;
    spec.missing_rate = 0.3;
    spec.seed = 5;
    const auto s = pipeline::simulate(spec);
    const auto r = imputation::em_impute(s.observed, hc);
    ASSERT_TRUE(r.completed.is_complete());
    for (std::size_t i = 0; i < s.observed.cells().size(); ++i) {
        if (s.observed.cells()[i] != Cell::Missing) ASSERT_EQ(r.completed.cells()[i], s.observed.cells()[i]);
    }
    EXPECT_EQ(r.edge_change_history.size(), r.iterations);
    if (r.converged) EXPECT_LT(r.edge_change_history.back(), 0.01);
}

TEST(Em, Deterministic) {
    pipeline::ScenarioSpec spec;
    spec.missing_rate = 0.3;
    spec.rows = 2000;
    spec.seed = 9;
    const auto s = pipeline::simulate(spec);
    imputation::EmOptions opt;
    opt.seed = 4;
    const auto a = imputation::em_impute(s.observed, hc, opt);
    const auto b = imputation::em_impute(s.observed, hc, opt);
    EXPECT_EQ(a.completed, b.completed);
    EXPECT_EQ(a.edge_change_history, b.edge_change_history);
    EXPECT_EQ(a.report_json(), b.report_json());
}

TEST(Em, ChainConvergesQuicklyFromRoundRobinStart) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        pipeline::ScenarioSpec spec;
        spec.missing_rate = 0.3;
        spec.seed = seed;
        const auto s = pipeline::simulate(spec);
        imputation::EmOptions opt;
        opt.initial = imputation::InitialMethod::RoundRobin;
        opt.seed = seed;
        const auto r = imputation::em_impute(s.observed, hc, opt);
        EXPECT_TRUE(r.converged);
        EXPECT_LE(r.iterations, 3u);
        const auto& g = r.model.dag();
        EXPECT_EQ(g.edge_count(), 4u);
        for (const auto& e : s.truth.dag().edges()) EXPECT_TRUE(g.adjacent(e.from, e.to));
    }
}

TEST(Em, LearnerFailureCarriesIteration) {
    int calls = 0;
    discovery::Learner flaky = [&](const data::EventMatrix& m, std::uint64_t) {
        if (++calls == 2) throw std::runtime_error("boom");
        return Dag::empty(m.columns());
    };
    const auto m = parse("a,b\nTrue,NaN\nFalse,True\nTrue,True\n");
    try {
        imputation::em_impute(m, flaky);
        FAIL() << "expected an error";
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("iteration 1"), std::string::npos) << e.what();
    }
}

TEST(Em, ReportJson) {
    const auto m = parse("a,b\nTrue,NaN\nFalse,True\nTrue,True\n");
    const auto json = imputation::em_impute(m, hc).report_json();
    for (const char* key : {"\"iterations\"", "\"edge_change_history\"", "\"converged\""}) {
        EXPECT_NE(json.find(key), std::string::npos);
    }
}
