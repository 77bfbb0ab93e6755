#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "eventchron/causal.hpp"
#include "eventchron/graph_io.hpp"
#include "eventchron/pipeline.hpp"
#include "eventchron/rng.hpp"

namespace eventchron::pipeline {

namespace {

struct Family {
    std::string node;
    std::vector<std::string> parents;
    std::vector<double> p1;
};

bn::DiscreteBayesNet build(const std::vector<std::string>& nodes, const std::vector<Family>& families) {
    std::vector<std::pair<std::string, std::string>> edges;
    for (const auto& f : families) {
        for (const auto& p : f.parents) edges.emplace_back(p, f.node);
    }
    bn::Dag g(nodes, edges);
    std::vector<bn::Cpt> cpts(nodes.size());
    for (const auto& f : families) {
        const auto v = g.index_of(f.node);
        cpts[v].node = v;
        for (const auto& p : f.parents) cpts[v].parents.push_back(g.index_of(p));
        cpts[v].p1 = f.p1;
    }
    return bn::DiscreteBayesNet(std::move(g), std::move(cpts));
}

std::vector<std::string> numbered(const std::string& prefix, std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 1; i <= n; ++i) out.push_back(prefix + std::to_string(i));
    return out;
}

bool parse_random(const std::string& name, std::size_t& d, double& p) {
    if (name.rfind("random-", 0) != 0) return false;
    const auto rest = name.substr(7);
    const auto dash = rest.find('-');
    if (dash == std::string::npos) return false;
    try {
        std::size_t used = 0;
        d = std::stoul(rest.substr(0, dash), &used);
        if (used != dash) return false;
        const auto ps = rest.substr(dash + 1);
        p = std::stod(ps, &used);
        if (used != ps.size()) return false;
    } catch (const std::exception&) {
        return false;
    }
    return d >= 1 && d <= 30 && p >= 0.0 && p <= 1.0;
}

}  // namespace

bn::DiscreteBayesNet preset_network(const std::string& name, std::uint64_t seed) {
    // Strong links: P(child = 1 | parent = 1) = 0.9, P(child = 1 | parent = 0) = 0.1.
    const std::vector<double> strong{0.1, 0.9};
    if (name == "chain") {
        const auto x = numbered("X", 5);
        // Root prior below one half so the marginal variance grows along the chain.
        return build(x, {{x[0], {}, {0.2}},
                         {x[1], {x[0]}, strong},
                         {x[2], {x[1]}, strong},
                         {x[3], {x[2]}, strong},
                         {x[4], {x[3]}, strong}});
    }
    if (name == "fork") {
        return build({"Z", "A", "B"}, {{"Z", {}, {0.5}}, {"A", {"Z"}, strong}, {"B", {"Z"}, strong}});
    }
    if (name == "collider") {
        return build({"A", "B", "C"}, {{"A", {}, {0.5}}, {"B", {}, {0.5}}, {"C", {"A", "B"}, {0.05, 0.7, 0.7, 0.95}}});
    }
    if (name == "diamond") {
        return build({"A", "B", "C", "D"}, {{"A", {}, {0.5}},
                                            {"B", {"A"}, strong},
                                            {"C", {"A"}, {0.2, 0.8}},
                                            {"D", {"B", "C"}, {0.05, 0.6, 0.6, 0.95}}});
    }
    if (name == "ndhB") {
        auto s = numbered("ndhB_ed", 12);
        auto nodes = s;
        nodes.push_back("intron");
        const std::vector<double> link{0.35, 0.92};
        std::vector<Family> f{{"intron", {}, {0.7}}, {s[0], {"intron"}, link}, {s[6], {"intron"}, link}};
        for (std::size_t i = 1; i < 6; ++i) f.push_back({s[i], {s[i - 1]}, link});
        for (std::size_t i = 7; i < 11; ++i) f.push_back({s[i], {s[i - 1]}, link});
        f.push_back({s[11], {s[5], s[10]}, {0.2, 0.6, 0.6, 0.95}});
        return build(nodes, f);
    }
    if (name == "ndhD") {
        const std::vector<double> link{0.3, 0.93};
        return build({"ndhD_116281", "ndhD_116290", "ndhD_116494", "ndhD_116785", "ndhD_117166"},
                     {{"ndhD_116281", {}, {0.8}},
                      {"ndhD_116785", {}, {0.85}},
                      {"ndhD_116290", {"ndhD_116281"}, link},
                      {"ndhD_116494", {"ndhD_116290", "ndhD_116785"}, {0.2, 0.55, 0.6, 0.95}},
                      {"ndhD_117166", {"ndhD_116785"}, link}});
    }
    std::size_t d = 0;
    double p = 0.0;
    if (parse_random(name, d, p)) {
        Rng rng(derive_seed(seed, "network"));
        const auto x = numbered("X", d);
        std::vector<Family> f;
        for (std::size_t j = 0; j < d; ++j) {
            Family fam{x[j], {}, {}};
            for (std::size_t i = 0; i < j; ++i) {
                if (rng.bernoulli(p)) fam.parents.push_back(x[i]);
            }
            fam.p1.resize(std::size_t{1} << fam.parents.size());
            for (auto& v : fam.p1) v = 0.1 + 0.8 * rng.uniform();
            f.push_back(std::move(fam));
        }
        return build(x, f);
    }
    throw ValidationError("unknown scenario preset '" + name + "'");
}

std::size_t preset_rows(const std::string& name) {
    if (name == "ndhB") return 1899;
    if (name == "ndhD") return 7752;
    if (name.rfind("random-", 0) == 0) return 2000;
    return 5000;
}

double preset_missing_rate(const std::string& name) {
    if (name == "ndhB") return 0.9;
    if (name == "ndhD") return 0.95;
    return 0.0;
}

data::EventMatrix mask_blocks(const data::EventMatrix& complete, double rate, std::uint64_t seed) {
    if (!(rate >= 0.0 && rate < 1.0)) throw ValidationError("missing rate must lie in [0, 1)");
    if (rate == 0.0) return complete;
    const std::size_t d = complete.cols();
    const double mean = rate * static_cast<double>(d);
    const double stop = 1.0 / (1.0 + mean);
    Rng rng(seed);
    auto cells = complete.cells();
    for (std::size_t r = 0; r < complete.rows(); ++r) {
        const auto start = static_cast<std::size_t>(rng.below(d));
        std::size_t length = 0;
        while (length < d && !rng.bernoulli(stop)) ++length;
        for (std::size_t c = start; c < std::min(d, start + length); ++c) cells[r * d + c] = data::Cell::Missing;
    }
    return complete.with_cells(std::move(cells));
}

Scenario simulate(const ScenarioSpec& spec) {
    bn::DiscreteBayesNet truth = [&] {
        if (!spec.network_path) return preset_network(spec.preset, spec.seed);
        std::ifstream in(*spec.network_path);
        if (!in) throw ValidationError("cannot read network file '" + *spec.network_path + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        return bn::network_from_json(ss.str());
    }();
    const std::size_t rows = spec.rows.value_or(spec.network_path ? 5000 : preset_rows(spec.preset));
    const double rate = spec.missing_rate.value_or(spec.network_path ? 0.0 : preset_missing_rate(spec.preset));
    if (rows == 0) throw ValidationError("scenario needs at least one row");

    auto complete = bn::sample(truth, rows, derive_seed(spec.seed, "sample"));
    auto observed = mask_blocks(complete, rate, derive_seed(spec.seed, "mask"));
    std::vector<TrueEffect> effects;
    for (const auto& [p, c] : truth.dag().labeled_edges()) effects.push_back({p, c, causal::ace_surgery(truth, p, c)});
    return Scenario{std::move(complete), std::move(observed), std::move(truth), std::move(effects)};
}

std::string Scenario::sidecar_json(const ScenarioSpec& spec) const {
    nlohmann::ordered_json j;
    j["preset"] = spec.network_path ? std::string("file") : spec.preset;
    j["synthetic"] = true;
    j["rows"] = observed.rows();
    j["missing_rate"] = spec.missing_rate.value_or(spec.network_path ? 0.0 : preset_missing_rate(spec.preset));
    j["seed"] = spec.seed;
    j["network"] = nlohmann::ordered_json::parse(bn::network_to_json(truth));
    auto eff = nlohmann::ordered_json::array();
    for (const auto& e : effects) eff.push_back({{"treatment", e.treatment}, {"outcome", e.outcome}, {"ace", e.ace}});
    j["true_effects"] = eff;
    return j.dump(2);
}

}  // namespace eventchron::pipeline
