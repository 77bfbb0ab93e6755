#include <algorithm>
#include <map>
#include <numeric>

#include <nlohmann/json.hpp>

#include "eventchron/chronology.hpp"
#include "eventchron/error.hpp"
#include "eventchron/rng.hpp"

namespace eventchron::chronology {

namespace {

class RejectionCounter {
public:
    RejectionCounter(const bn::BinaryData& data, double alpha) : data_(data), alpha_(alpha) {}

    std::size_t operator()(const std::vector<bn::CiStatement>& statements) {
        std::size_t rejected = 0;
        for (const auto& s : statements) {
            const auto key = std::make_tuple(std::min(s.x, s.y), std::max(s.x, s.y), s.z);
            auto it = cache_.find(key);
            if (it == cache_.end()) {
                const bool reject = discovery::ci_test_g2(data_, s.x, s.y, s.z).p_value < alpha_;
                it = cache_.emplace(key, reject).first;
            }
            rejected += it->second ? 1 : 0;
        }
        return rejected;
    }

private:
    const bn::BinaryData& data_;
    double alpha_;
    std::map<std::tuple<std::size_t, std::size_t, std::vector<std::size_t>>, bool> cache_;
};

}  // namespace

FalsificationVerdict falsify(const bn::Dag& g, const data::EventMatrix& data, const FalsifyOptions& options) {
    if (g.size() == 0) throw ValidationError("cannot falsify an empty graph");
    // Node i of g is data column g.nodes()[i].
    const auto bin = bn::BinaryData::from(data, g.nodes());
    RejectionCounter count(bin, options.alpha_ci);

    FalsificationVerdict v;
    const auto statements = bn::local_markov_statements(g);
    v.statements = statements.size();
    v.v_given = count(statements);
    if (statements.empty()) return v;

    Rng rng(derive_seed(options.seed, "falsify"));
    const std::size_t max_draws = std::max<std::size_t>(1, options.max_draw_factor) * options.n_permutations;
    std::size_t equivalent = 0;
    std::vector<std::size_t> perm(g.size());
    while (v.baseline.size() < options.n_permutations && v.draws < max_draws) {
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        rng.shuffle(perm);
        ++v.draws;
        std::vector<bn::Edge> edges;
        for (const auto& e : g.edges()) edges.push_back({perm[e.from], perm[e.to]});
        const auto permuted = g.with_edges(std::move(edges));
        if (bn::markov_equivalent(g, permuted)) {
            ++equivalent;
            continue;
        }
        v.baseline.push_back(count(bn::local_markov_statements(permuted)));
    }
    v.equivalent_fraction = v.draws ? static_cast<double>(equivalent) / static_cast<double>(v.draws) : 0.0;
    v.falsifiable = v.equivalent_fraction <= 0.5;

    std::size_t as_good = 0;
    for (auto b : v.baseline) as_good += b <= v.v_given ? 1 : 0;
    v.p_value = static_cast<double>(1 + as_good) / static_cast<double>(v.baseline.size() + 1);
    v.falsified = (!v.baseline.empty() && v.p_value >= options.alpha_f) || v.v_given == v.statements;
    return v;
}

std::string FalsificationVerdict::to_json() const {
    nlohmann::ordered_json j;
    j["falsifiable"] = falsifiable;
    j["falsified"] = falsified;
    j["statements"] = statements;
    j["v_given"] = v_given;
    j["baseline"] = baseline;
    j["p_value"] = p_value;
    j["equivalent_fraction"] = equivalent_fraction;
    j["draws"] = draws;
    return j.dump(2);
}

}  // namespace eventchron::chronology
