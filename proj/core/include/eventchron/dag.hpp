#ifndef EVENTCHRON_DAG_HPP
#define EVENTCHRON_DAG_HPP

#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace eventchron::bn {

/// Directed edge between node indices.
struct Edge {
    std::size_t from;
    std::size_t to;
    auto operator<=>(const Edge&) const = default;
};

/// Directed acyclic graph over labelled nodes. Acyclicity is verified on
/// construction; all mutators return a new graph.
///
/// Node order is the declared order and drives every deterministic
/// tie-break; edges are kept sorted lexicographically by (from, to).
class Dag {
public:
    Dag() = default;
    Dag(std::vector<std::string> nodes, std::vector<Edge> edges);
    Dag(std::vector<std::string> nodes, const std::vector<std::pair<std::string, std::string>>& edges);

    static Dag empty(std::vector<std::string> nodes) { return Dag(std::move(nodes), std::vector<Edge>{}); }

    std::size_t size() const { return nodes_.size(); }
    const std::vector<std::string>& nodes() const { return nodes_; }
    const std::string& label(std::size_t i) const { return nodes_.at(i); }
    std::optional<std::size_t> find(const std::string& label) const;
    /// Throws ValidationError on unknown labels.
    std::size_t index_of(const std::string& label) const;

    const std::vector<Edge>& edges() const { return edges_; }
    std::size_t edge_count() const { return edges_.size(); }
    bool has_edge(std::size_t from, std::size_t to) const;
    bool adjacent(std::size_t a, std::size_t b) const { return has_edge(a, b) || has_edge(b, a); }

    /// Sorted ascending.
    const std::vector<std::size_t>& parents(std::size_t v) const { return parents_.at(v); }
    const std::vector<std::size_t>& children(std::size_t v) const { return children_.at(v); }

    /// Kahn order; ready nodes are emitted smallest index first.
    std::vector<std::size_t> topological_order() const;
    std::vector<bool> descendants(std::size_t v) const;  // excludes v
    std::vector<bool> ancestors(std::size_t v) const;    // excludes v
    /// True when a directed path from `from` to `to` exists (length >= 1).
    bool reachable(std::size_t from, std::size_t to) const;

    bool would_create_cycle(std::size_t from, std::size_t to) const;
    Dag with_edge(std::size_t from, std::size_t to) const;
    Dag without_edge(std::size_t from, std::size_t to) const;
    Dag with_edges(std::vector<Edge> edges) const { return Dag(nodes_, std::move(edges)); }

    /// Same structure, node i renamed to labels[i].
    Dag relabeled(std::vector<std::string> labels) const;

    std::vector<std::pair<std::string, std::string>> labeled_edges() const;

    bool operator==(const Dag& other) const { return nodes_ == other.nodes_ && edges_ == other.edges_; }

private:
    void index_edges();

    std::vector<std::string> nodes_;
    std::vector<Edge> edges_;
    std::vector<std::vector<std::size_t>> parents_;
    std::vector<std::vector<std::size_t>> children_;
};

/// Returns a directed cycle (node sequence) when the edges are not acyclic.
std::optional<std::vector<std::size_t>> find_cycle(std::size_t n, const std::vector<Edge>& edges);
bool is_acyclic(std::size_t n, const std::vector<Edge>& edges);

/// level 0 for roots, otherwise 1 + max level over parents.
std::vector<std::size_t> topological_levels(const Dag& g);

/// Reachability over active trails (Bayes-ball).
bool d_separated(const Dag& g, std::size_t x, std::size_t y, const std::vector<std::size_t>& z);
bool d_separated(const Dag& g, const std::string& x, const std::string& y, const std::vector<std::string>& z);

/// x independent of y given z.
struct CiStatement {
    std::size_t x;
    std::size_t y;
    std::vector<std::size_t> z;  // sorted
    auto operator<=>(const CiStatement&) const = default;
};

/// One statement per (node, non-descendant non-parent) pair, conditioned on
/// the node's parents. Ordered by node then by the other variable.
std::vector<CiStatement> local_markov_statements(const Dag& g);

/// Same skeleton and same unshielded colliders; equivalently, the two graphs
/// imply the same set of d-separation statements.
bool markov_equivalent(const Dag& a, const Dag& b);

}  // namespace eventchron::bn

#endif  // EVENTCHRON_DAG_HPP
