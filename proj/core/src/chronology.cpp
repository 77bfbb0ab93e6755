#include "eventchron/chronology.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <set>

#include <nlohmann/json.hpp>

#include "eventchron/bayesnet.hpp"
#include "eventchron/error.hpp"
#include "eventchron/graph_io.hpp"

namespace eventchron::chronology {

std::map<std::string, std::size_t> ChronologyTree::level_map() const {
    std::map<std::string, std::size_t> out;
    for (std::size_t i = 0; i < tree.size(); ++i) out[tree.label(i)] = level[i];
    return out;
}

std::string ChronologyTree::to_dot(const std::string& name) const {
    bn::DotOptions opts;
    opts.graph_name = name;
    opts.ranks = level_map();
    return bn::to_dot(tree, opts);
}

std::string ChronologyTree::to_json() const {
    nlohmann::ordered_json j;
    auto nodes = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < tree.size(); ++i) nodes.push_back({{"label", tree.label(i)}, {"level", level[i]}});
    j["nodes"] = nodes;
    j["edges"] = nlohmann::ordered_json::array();
    for (const auto& [p, c] : tree.labeled_edges()) j["edges"].push_back({p, c});
    j["isolated"] = isolated;
    j["simultaneity_groups"] = simultaneity_groups;
    return j.dump(2);
}

std::vector<causal::EffectEstimate> strong_causal_relations(const causal::CausalRelationTable& table, const bn::Dag& g) {
    const auto levels = bn::topological_levels(g);
    const auto level_of = [&](const std::string& label) { return levels[g.index_of(label)]; };
    std::map<std::string, causal::EffectEstimate> best;
    for (const auto& row : table.rows) {
        if (!row.validated) continue;
        auto it = best.find(row.outcome);
        if (it == best.end()) {
            best.emplace(row.outcome, row);
            continue;
        }
        const auto& cur = it->second;
        const bool better =
            row.value > cur.value ||
            (row.value == cur.value && (level_of(row.treatment) < level_of(cur.treatment) ||
                                        (level_of(row.treatment) == level_of(cur.treatment) && row.treatment < cur.treatment)));
        if (better) it->second = row;
    }
    std::vector<causal::EffectEstimate> out;
    for (auto& [outcome, row] : best) out.push_back(std::move(row));
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.value > b.value; });
    return out;
}

ChronologyTree build_chronology(const bn::Dag& g, const std::vector<causal::EffectEstimate>& strong) {
    const auto levels = bn::topological_levels(g);

    struct Candidate {
        std::size_t from, to;
        double value;
    };
    std::vector<Candidate> candidates;
    for (const auto& r : strong) {
        const auto from = g.index_of(r.treatment), to = g.index_of(r.outcome);
        if (!g.has_edge(from, to)) throw ValidationError("relation " + r.treatment + " -> " + r.outcome + " is not an edge of the graph");
        candidates.push_back({from, to, r.value});
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [&](const Candidate& a, const Candidate& b) { return levels[a.from] < levels[b.from]; });

    std::vector<bool> has_parent(g.size(), false);
    std::vector<bn::Edge> edges;
    for (const auto& c : candidates) {
        if (has_parent[c.to]) continue;
        has_parent[c.to] = true;
        edges.push_back({c.from, c.to});
    }

    ChronologyTree t;
    t.tree = g.with_edges(std::move(edges));
    t.level = bn::topological_levels(t.tree);
    for (std::size_t v = 0; v < t.tree.size(); ++v) {
        if (t.tree.parents(v).empty() && t.tree.children(v).empty()) t.isolated.push_back(t.tree.label(v));
    }
    return t;
}

namespace {

struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t v) {
        while (parent[v] != v) v = parent[v] = parent[parent[v]];
        return v;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

}  // namespace

BaselineResult deterministic_chronology(const data::EventMatrix& m, double alpha, discovery::Correction correction) {
    const std::size_t d = m.cols();
    if (d < 2) throw ValidationError("the baseline needs at least two events");
    BaselineResult out;

    std::vector<double> raw;
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i + 1; j < d; ++j) {
            PairTest t;
            t.a = m.columns()[i];
            t.b = m.columns()[j];
            t.table = data::contingency(m, i, j);
            t.p_value = t.table.total() > 0 ? discovery::fisher_exact(t.table) : 1.0;
            raw.push_back(t.p_value);
            out.tests.push_back(std::move(t));
        }
    }
    const auto adjusted = discovery::adjust_p_values(raw, correction);

    UnionFind uf(d);
    std::vector<bool> involved(d, false);
    std::size_t k = 0;
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i + 1; j < d; ++j, ++k) {
            auto& t = out.tests[k];
            t.adjusted_p = adjusted[k];
            t.dependent = t.table.total() > 0 && t.adjusted_p < alpha;
            if (!t.dependent) continue;
            involved[i] = involved[j] = true;
            if (t.table.n10 == t.table.n01) uf.unite(i, j);
        }
    }

    // Groups ordered by their first member's column.
    std::map<std::size_t, std::size_t> group_of_root;
    std::vector<std::size_t> group(d);
    for (std::size_t v = 0; v < d; ++v) {
        const auto r = uf.find(v);
        auto [it, inserted] = group_of_root.emplace(r, out.groups.size());
        if (inserted) out.groups.emplace_back();
        out.groups[it->second].push_back(m.columns()[v]);
        group[v] = it->second;
    }
    std::vector<std::string> labels;
    for (const auto& members : out.groups) {
        std::string label;
        for (std::size_t i = 0; i < members.size(); ++i) label += (i ? "+" : "") + members[i];
        labels.push_back(label);
    }
    for (std::size_t v = 0; v < d; ++v) {
        if (!involved[v]) out.isolated.push_back(m.columns()[v]);
    }

    std::map<bn::Edge, std::size_t> margin;
    k = 0;
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i + 1; j < d; ++j, ++k) {
            const auto& t = out.tests[k];
            if (!t.dependent || t.table.n10 == t.table.n01 || group[i] == group[j]) continue;
            const bool forward = t.table.n10 > t.table.n01;
            const bn::Edge e = forward ? bn::Edge{group[i], group[j]} : bn::Edge{group[j], group[i]};
            const std::size_t gap = forward ? t.table.n10 - t.table.n01 : t.table.n01 - t.table.n10;
            auto& slot = margin[e];
            slot = std::max(slot, gap);
        }
    }

    for (;;) {
        std::vector<bn::Edge> edges;
        for (const auto& [e, gap] : margin) edges.push_back(e);
        const auto cycle = bn::find_cycle(labels.size(), edges);
        if (!cycle) {
            out.dag = bn::Dag(labels, std::move(edges));
            break;
        }
        std::optional<bn::Edge> weakest;
        for (std::size_t c = 0; c < cycle->size(); ++c) {
            const bn::Edge e{(*cycle)[c], (*cycle)[(c + 1) % cycle->size()]};
            if (!weakest || margin[e] < margin[*weakest] || (margin[e] == margin[*weakest] && e < *weakest)) weakest = e;
        }
        out.removed_for_cycles.emplace_back(labels[weakest->from], labels[weakest->to]);
        out.warnings.push_back("orientation cycle broken by removing " + labels[weakest->from] + " -> " +
                               labels[weakest->to] + " (margin " + std::to_string(margin[*weakest]) + ")");
        margin.erase(*weakest);
    }
    return out;
}

std::string BaselineResult::to_json() const {
    nlohmann::ordered_json j;
    j["nodes"] = dag.nodes();
    j["edges"] = nlohmann::ordered_json::array();
    for (const auto& [p, c] : dag.labeled_edges()) j["edges"].push_back({p, c});
    auto groups_json = nlohmann::ordered_json::array();
    for (const auto& g : groups) {
        if (g.size() > 1) groups_json.push_back(g);
    }
    j["simultaneity_groups"] = groups_json;
    j["isolated"] = isolated;
    auto tests_json = nlohmann::ordered_json::array();
    for (const auto& t : tests) {
        tests_json.push_back({{"a", t.a},
                              {"b", t.b},
                              {"n00", t.table.n00},
                              {"n01", t.table.n01},
                              {"n10", t.table.n10},
                              {"n11", t.table.n11},
                              {"p_value", t.p_value},
                              {"adjusted_p", t.adjusted_p},
                              {"dependent", t.dependent}});
    }
    j["tests"] = tests_json;
    j["removed_for_cycles"] = nlohmann::ordered_json::array();
    for (const auto& [p, c] : removed_for_cycles) j["removed_for_cycles"].push_back({p, c});
    j["warnings"] = warnings;
    return j.dump(2);
}

std::vector<ModelScore> compare_models(const std::vector<std::pair<std::string, bn::Dag>>& models,
                                       const data::EventMatrix& data, double ess) {
    const std::set<std::string> columns(data.columns().begin(), data.columns().end());
    std::vector<ModelScore> out;
    for (const auto& [name, g] : models) {
        if (std::set<std::string>(g.nodes().begin(), g.nodes().end()) != columns)
            throw ValidationError("model '" + name + "' does not cover exactly the data columns");
        const auto bin = bn::BinaryData::from(data, g.nodes());
        ModelScore s;
        s.name = name;
        s.bic = bn::bic_score(g, bin);
        s.log_likelihood = bn::log_likelihood(bn::fit_cpts(g, bin, ess), data);
        s.edges = g.edge_count();
        out.push_back(std::move(s));
    }
    std::stable_sort(out.begin(), out.end(), [](const ModelScore& a, const ModelScore& b) { return a.bic > b.bic; });
    return out;
}

std::string scores_csv(const std::vector<ModelScore>& scores) {
    std::string out = "model,bic,log_likelihood,edges\n";
    char buf[128];
    for (const auto& s : scores) {
        std::snprintf(buf, sizeof buf, ",%.10g,%.10g,%zu\n", s.bic, s.log_likelihood, s.edges);
        out += s.name + buf;
    }
    return out;
}

ConsensusSummary consensus_edges(const std::vector<bn::Dag>& dags, std::size_t min_count) {
    ConsensusSummary s;
    for (const auto& g : dags) {
        for (const auto& [p, c] : g.labeled_edges()) {
            ++s.directed[{p, c}];
            ++s.undirected[std::minmax(p, c)];
        }
    }
    for (const auto& [e, n] : s.directed) {
        if (n >= min_count) s.consensus_directed.push_back(e);
    }
    for (const auto& [e, n] : s.undirected) {
        if (n >= min_count) s.consensus_undirected.push_back(e);
    }
    return s;
}

std::string ConsensusSummary::to_json() const {
    nlohmann::ordered_json j;
    auto dir = nlohmann::ordered_json::array();
    for (const auto& [e, n] : directed) dir.push_back({{"from", e.first}, {"to", e.second}, {"count", n}});
    auto und = nlohmann::ordered_json::array();
    for (const auto& [e, n] : undirected) und.push_back({{"a", e.first}, {"b", e.second}, {"count", n}});
    j["directed"] = dir;
    j["undirected"] = und;
    j["consensus_directed"] = nlohmann::ordered_json::array();
    for (const auto& [a, b] : consensus_directed) j["consensus_directed"].push_back({a, b});
    j["consensus_undirected"] = nlohmann::ordered_json::array();
    for (const auto& [a, b] : consensus_undirected) j["consensus_undirected"].push_back({a, b});
    return j.dump(2);
}

}  // namespace eventchron::chronology
