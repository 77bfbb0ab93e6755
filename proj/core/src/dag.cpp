#include "eventchron/dag.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <tuple>

#include "eventchron/error.hpp"

namespace eventchron::bn {

Dag::Dag(std::vector<std::string> nodes, std::vector<Edge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
    std::set<std::string> seen;
    for (const auto& n : nodes_) {
        if (n.empty()) throw ValidationError("empty node label");
        if (!seen.insert(n).second) throw ValidationError("duplicate node label '" + n + "'");
    }
    std::sort(edges_.begin(), edges_.end());
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
    for (const auto& e : edges_) {
        if (e.from >= nodes_.size() || e.to >= nodes_.size()) throw ValidationError("edge endpoint out of range");
        if (e.from == e.to) throw ValidationError("self-loop on '" + nodes_[e.from] + "'");
    }
    if (auto cycle = find_cycle(nodes_.size(), edges_)) {
        std::string msg = "directed cycle:";
        for (auto v : *cycle) msg += " " + nodes_[v];
        throw ValidationError(msg);
    }
    index_edges();
}

namespace {

std::vector<Edge> resolve_edges(const std::vector<std::string>& nodes,
                                const std::vector<std::pair<std::string, std::string>>& edges) {
    std::vector<Edge> out;
    out.reserve(edges.size());
    const auto idx = [&](const std::string& l) {
        auto it = std::find(nodes.begin(), nodes.end(), l);
        if (it == nodes.end()) throw ValidationError("edge references unknown node '" + l + "'");
        return static_cast<std::size_t>(it - nodes.begin());
    };
    for (const auto& [p, c] : edges) out.push_back({idx(p), idx(c)});
    return out;
}

}  // namespace

Dag::Dag(std::vector<std::string> nodes, const std::vector<std::pair<std::string, std::string>>& edges)
    : Dag(nodes, resolve_edges(nodes, edges)) {}

void Dag::index_edges() {
    parents_.assign(nodes_.size(), {});
    children_.assign(nodes_.size(), {});
    for (const auto& e : edges_) {
        parents_[e.to].push_back(e.from);
        children_[e.from].push_back(e.to);
    }
    for (auto& p : parents_) std::sort(p.begin(), p.end());
}

std::optional<std::size_t> Dag::find(const std::string& label) const {
    auto it = std::find(nodes_.begin(), nodes_.end(), label);
    if (it == nodes_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - nodes_.begin());
}

std::size_t Dag::index_of(const std::string& label) const {
    if (auto i = find(label)) return *i;
    throw ValidationError("unknown node '" + label + "'");
}

bool Dag::has_edge(std::size_t from, std::size_t to) const {
    return std::binary_search(edges_.begin(), edges_.end(), Edge{from, to});
}

std::vector<std::size_t> Dag::topological_order() const {
    std::vector<std::size_t> indeg(nodes_.size());
    for (const auto& e : edges_) ++indeg[e.to];
    std::set<std::size_t> ready;
    for (std::size_t v = 0; v < nodes_.size(); ++v) {
        if (indeg[v] == 0) ready.insert(v);
    }
    std::vector<std::size_t> order;
    order.reserve(nodes_.size());
    while (!ready.empty()) {
        const std::size_t v = *ready.begin();
        ready.erase(ready.begin());
        order.push_back(v);
        for (auto c : children_[v]) {
            if (--indeg[c] == 0) ready.insert(c);
        }
    }
    return order;
}

std::vector<bool> Dag::descendants(std::size_t v) const {
    std::vector<bool> seen(nodes_.size(), false);
    std::vector<std::size_t> stack(children_.at(v).begin(), children_.at(v).end());
    while (!stack.empty()) {
        const auto u = stack.back();
        stack.pop_back();
        if (seen[u]) continue;
        seen[u] = true;
        for (auto c : children_[u]) stack.push_back(c);
    }
    return seen;
}

std::vector<bool> Dag::ancestors(std::size_t v) const {
    std::vector<bool> seen(nodes_.size(), false);
    std::vector<std::size_t> stack(parents_.at(v).begin(), parents_.at(v).end());
    while (!stack.empty()) {
        const auto u = stack.back();
        stack.pop_back();
        if (seen[u]) continue;
        seen[u] = true;
        for (auto p : parents_[u]) stack.push_back(p);
    }
    return seen;
}

bool Dag::reachable(std::size_t from, std::size_t to) const { return descendants(from)[to]; }

bool Dag::would_create_cycle(std::size_t from, std::size_t to) const {
    return from == to || reachable(to, from);
}

Dag Dag::with_edge(std::size_t from, std::size_t to) const {
    auto edges = edges_;
    edges.push_back({from, to});
    return Dag(nodes_, std::move(edges));
}

Dag Dag::without_edge(std::size_t from, std::size_t to) const {
    auto edges = edges_;
    edges.erase(std::remove(edges.begin(), edges.end(), Edge{from, to}), edges.end());
    return Dag(nodes_, std::move(edges));
}

Dag Dag::relabeled(std::vector<std::string> labels) const {
    if (labels.size() != nodes_.size()) throw ValidationError("relabel size mismatch");
    return Dag(std::move(labels), edges_);
}

std::vector<std::pair<std::string, std::string>> Dag::labeled_edges() const {
    std::vector<std::pair<std::string, std::string>> out;
    out.reserve(edges_.size());
    for (const auto& e : edges_) out.emplace_back(nodes_[e.from], nodes_[e.to]);
    return out;
}

std::optional<std::vector<std::size_t>> find_cycle(std::size_t n, const std::vector<Edge>& edges) {
    std::vector<std::vector<std::size_t>> adj(n);
    for (const auto& e : edges) adj[e.from].push_back(e.to);
    for (auto& a : adj) std::sort(a.begin(), a.end());
    // 0 = unvisited, 1 = on stack, 2 = done
    std::vector<int> state(n, 0);
    for (std::size_t s = 0; s < n; ++s) {
        if (state[s]) continue;
        std::vector<std::pair<std::size_t, std::size_t>> stack{{s, 0}};
        state[s] = 1;
        while (!stack.empty()) {
            auto& [v, i] = stack.back();
            if (i < adj[v].size()) {
                const auto w = adj[v][i++];
                if (state[w] == 1) {
                    std::vector<std::size_t> cycle{w};
                    for (auto it = stack.rbegin(); it != stack.rend() && it->first != w; ++it) {
                        cycle.push_back(it->first);
                    }
                    std::reverse(cycle.begin() + 1, cycle.end());
                    return cycle;
                }
                if (state[w] == 0) {
                    state[w] = 1;
                    stack.emplace_back(w, 0);
                }
            } else {
                state[v] = 2;
                stack.pop_back();
            }
        }
    }
    return std::nullopt;
}

bool is_acyclic(std::size_t n, const std::vector<Edge>& edges) { return !find_cycle(n, edges).has_value(); }

std::vector<std::size_t> topological_levels(const Dag& g) {
    std::vector<std::size_t> level(g.size(), 0);
    for (auto v : g.topological_order()) {
        for (auto p : g.parents(v)) level[v] = std::max(level[v], level[p] + 1);
    }
    return level;
}

bool d_separated(const Dag& g, std::size_t x, std::size_t y, const std::vector<std::size_t>& z) {
    const std::size_t n = g.size();
    if (x >= n || y >= n) throw ValidationError("d-separation: node out of range");
    if (x == y) throw ValidationError("d-separation needs distinct x and y");
    std::vector<bool> in_z(n, false);
    for (auto v : z) {
        if (v >= n) throw ValidationError("d-separation: node out of range");
        in_z[v] = true;
    }
    if (in_z[x] || in_z[y]) throw ValidationError("d-separation: x and y must not be in the conditioning set");

    // Nodes that are in z or have a descendant in z: colliders there are open.
    std::vector<bool> z_or_anc(n, false);
    for (auto v : z) {
        z_or_anc[v] = true;
        auto anc = g.ancestors(v);
        for (std::size_t u = 0; u < n; ++u) {
            if (anc[u]) z_or_anc[u] = true;
        }
    }

    // Visit states: (node, arrived from child = going up) / (node, arrived from parent = going down)
    std::vector<bool> up_seen(n, false), down_seen(n, false);
    std::deque<std::pair<std::size_t, bool>> queue{{x, true}};
    while (!queue.empty()) {
        auto [v, up] = queue.front();
        queue.pop_front();
        if (up) {
            if (up_seen[v]) continue;
            up_seen[v] = true;
        } else {
            if (down_seen[v]) continue;
            down_seen[v] = true;
        }
        if (v == y && !in_z[v]) return false;
        if (up) {
            if (in_z[v]) continue;
            for (auto p : g.parents(v)) queue.emplace_back(p, true);
            for (auto c : g.children(v)) queue.emplace_back(c, false);
        } else {
            if (!in_z[v]) {
                for (auto c : g.children(v)) queue.emplace_back(c, false);
            }
            if (z_or_anc[v]) {
                for (auto p : g.parents(v)) queue.emplace_back(p, true);
            }
        }
    }
    return true;
}

bool d_separated(const Dag& g, const std::string& x, const std::string& y, const std::vector<std::string>& z) {
    std::vector<std::size_t> zi;
    zi.reserve(z.size());
    for (const auto& l : z) zi.push_back(g.index_of(l));
    return d_separated(g, g.index_of(x), g.index_of(y), zi);
}

std::vector<CiStatement> local_markov_statements(const Dag& g) {
    std::vector<CiStatement> out;
    for (std::size_t v = 0; v < g.size(); ++v) {
        const auto desc = g.descendants(v);
        const auto& pa = g.parents(v);
        for (std::size_t u = 0; u < g.size(); ++u) {
            if (u == v || desc[u]) continue;
            if (std::binary_search(pa.begin(), pa.end(), u)) continue;
            out.push_back({v, u, pa});
        }
    }
    return out;
}

bool markov_equivalent(const Dag& a, const Dag& b) {
    if (a.size() != b.size()) return false;
    const std::size_t n = a.size();
    for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t v = u + 1; v < n; ++v) {
            if (a.adjacent(u, v) != b.adjacent(u, v)) return false;
        }
    }
    const auto colliders = [n](const Dag& g) {
        std::set<std::tuple<std::size_t, std::size_t, std::size_t>> out;
        for (std::size_t c = 0; c < n; ++c) {
            const auto& pa = g.parents(c);
            for (std::size_t i = 0; i < pa.size(); ++i) {
                for (std::size_t j = i + 1; j < pa.size(); ++j) {
                    if (!g.adjacent(pa[i], pa[j])) out.emplace(pa[i], c, pa[j]);
                }
            }
        }
        return out;
    };
    return colliders(a) == colliders(b);
}

}  // namespace eventchron::bn
