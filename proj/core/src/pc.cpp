#include <algorithm>

#include "eventchron/discovery.hpp"
#include "eventchron/error.hpp"

namespace eventchron::discovery {

namespace {

/// Calls fn(subset) for every size-k subset of `items` in lexicographic
/// order; stops early when fn returns true. Returns whether it stopped.
template <typename Fn>
bool for_each_subset(const std::vector<std::size_t>& items, std::size_t k, Fn&& fn) {
    if (k > items.size()) return false;
    std::vector<std::size_t> pos(k);
    for (std::size_t i = 0; i < k; ++i) pos[i] = i;
    std::vector<std::size_t> subset(k);
    for (;;) {
        for (std::size_t i = 0; i < k; ++i) subset[i] = items[pos[i]];
        if (fn(subset)) return true;
        std::size_t i = k;
        while (i > 0 && pos[i - 1] == items.size() - k + i - 1) --i;
        if (i == 0) return false;
        ++pos[i - 1];
        for (std::size_t j = i; j < k; ++j) pos[j] = pos[j - 1] + 1;
    }
}

/// Partially directed graph: adj = skeleton, dir(i, j) = oriented i -> j.
class Pdag {
public:
    explicit Pdag(std::size_t n) : n_(n), adj_(n * n, false), dir_(n * n, false) {}

    std::size_t size() const { return n_; }
    bool adjacent(std::size_t a, std::size_t b) const { return adj_[a * n_ + b]; }
    bool directed(std::size_t a, std::size_t b) const { return dir_[a * n_ + b]; }
    bool undirected(std::size_t a, std::size_t b) const {
        return adjacent(a, b) && !directed(a, b) && !directed(b, a);
    }
    void connect(std::size_t a, std::size_t b) { adj_[a * n_ + b] = adj_[b * n_ + a] = true; }
    void disconnect(std::size_t a, std::size_t b) {
        adj_[a * n_ + b] = adj_[b * n_ + a] = false;
        dir_[a * n_ + b] = dir_[b * n_ + a] = false;
    }

    /// Directed path from -> ... -> to using oriented edges only.
    bool directed_path(std::size_t from, std::size_t to) const {
        std::vector<bool> seen(n_, false);
        std::vector<std::size_t> stack{from};
        while (!stack.empty()) {
            const auto v = stack.back();
            stack.pop_back();
            for (std::size_t w = 0; w < n_; ++w) {
                if (!directed(v, w) || seen[w]) continue;
                if (w == to) return true;
                seen[w] = true;
                stack.push_back(w);
            }
        }
        return false;
    }

    /// Orients a -> b unless it conflicts with an existing orientation or
    /// would close a directed cycle.
    bool orient(std::size_t a, std::size_t b) {
        if (!undirected(a, b)) return false;
        if (directed_path(b, a)) return false;
        dir_[a * n_ + b] = true;
        return true;
    }

private:
    std::size_t n_;
    std::vector<bool> adj_;
    std::vector<bool> dir_;
};

/// Meek rules R1-R3 to a fixed point. Returns the edges oriented.
std::vector<bn::Edge> apply_meek(Pdag& g) {
    std::vector<bn::Edge> oriented;
    const std::size_t n = g.size();
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t b = 0; b < n; ++b) {
            for (std::size_t c = 0; c < n; ++c) {
                if (!g.undirected(b, c)) continue;
                bool orient = false;
                // R1: a -> b - c, a and c non-adjacent.
                for (std::size_t a = 0; a < n && !orient; ++a) {
                    if (a != c && g.directed(a, b) && !g.adjacent(a, c)) orient = true;
                }
                // R2: b -> a -> c with b - c.
                for (std::size_t a = 0; a < n && !orient; ++a) {
                    if (g.directed(b, a) && g.directed(a, c)) orient = true;
                }
                // R3: b - x, b - y, x -> c, y -> c, x and y non-adjacent.
                for (std::size_t x = 0; x < n && !orient; ++x) {
                    if (!g.undirected(b, x) || !g.directed(x, c)) continue;
                    for (std::size_t y = x + 1; y < n && !orient; ++y) {
                        if (g.undirected(b, y) && g.directed(y, c) && !g.adjacent(x, y)) orient = true;
                    }
                }
                if (orient && g.orient(b, c)) {
                    oriented.push_back({b, c});
                    changed = true;
                }
            }
        }
    }
    return oriented;
}

bool creates_new_collider(const Pdag& g, std::size_t from, std::size_t to) {
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (k != from && g.directed(k, to) && !g.adjacent(k, from)) return true;
    }
    return false;
}

}  // namespace

PcResult pc_learn_detailed(const data::EventMatrix& data, const PcOptions& options) {
    const std::size_t n = data.cols();
    if (!(options.alpha > 0.0 && options.alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
    const auto bin = bn::BinaryData::from(data);
    PcResult result;

    Pdag g(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) g.connect(i, j);
    }

    // Skeleton: adjacency sets are frozen at the start of each level, which
    // makes the result independent of variable order.
    for (std::size_t level = 0;; ++level) {
        if (options.max_condition_size && level > *options.max_condition_size) break;
        std::vector<std::vector<std::size_t>> frozen(n);
        bool any_testable = false;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (i != j && g.adjacent(i, j)) frozen[i].push_back(j);
            }
            if (frozen[i].size() >= level + 1) any_testable = true;
        }
        if (!any_testable) break;

        std::vector<std::pair<std::size_t, std::size_t>> removals;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                if (!g.adjacent(i, j)) continue;
                std::vector<std::size_t> sepset;
                const auto test_from = [&](std::size_t a, std::size_t b) {
                    std::vector<std::size_t> pool;
                    for (auto v : frozen[a]) {
                        if (v != b) pool.push_back(v);
                    }
                    return for_each_subset(pool, level, [&](const std::vector<std::size_t>& z) {
                        if (ci_test_g2(bin, i, j, z).p_value > options.alpha) {
                            sepset = z;
                            return true;
                        }
                        return false;
                    });
                };
                if (test_from(i, j) || test_from(j, i)) {
                    removals.emplace_back(i, j);
                    result.sepsets[{i, j}] = sepset;
                }
            }
        }
        for (const auto& [i, j] : removals) g.disconnect(i, j);
    }

    // Colliders i -> k <- j for unshielded triples with k outside sepset(i, j).
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            if (i == k || !g.adjacent(i, k)) continue;
            for (std::size_t j = i + 1; j < n; ++j) {
                if (j == k || !g.adjacent(j, k) || g.adjacent(i, j)) continue;
                const auto& sep = result.sepsets[{i, j}];
                if (std::find(sep.begin(), sep.end(), k) != sep.end()) continue;
                g.orient(i, k);
                g.orient(j, k);
            }
        }
    }
    apply_meek(g);

    // Extend to a DAG along the column order.
    for (;;) {
        std::optional<std::pair<std::size_t, std::size_t>> pick;
        for (std::size_t i = 0; i < n && !pick; ++i) {
            for (std::size_t j = i + 1; j < n && !pick; ++j) {
                if (g.undirected(i, j)) pick = {i, j};
            }
        }
        if (!pick) break;
        const auto [i, j] = *pick;
        const auto clean = [&](std::size_t a, std::size_t b) {
            return !g.directed_path(b, a) && !creates_new_collider(g, a, b);
        };
        std::size_t from = i, to = j;
        if (!clean(i, j)) {
            if (clean(j, i) || g.directed_path(j, i)) std::swap(from, to);
        }
        g.orient(from, to);
        result.order_forced.push_back({from, to});
        for (const auto& e : apply_meek(g)) result.order_forced.push_back(e);
    }

    std::vector<bn::Edge> edges;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (g.directed(i, j)) edges.push_back({i, j});
        }
    }
    std::sort(result.order_forced.begin(), result.order_forced.end());
    result.dag = bn::Dag(data.columns(), std::move(edges));
    return result;
}

bn::Dag pc_learn(const data::EventMatrix& data, double alpha) {
    return pc_learn_detailed(data, PcOptions{alpha, std::nullopt}).dag;
}

}  // namespace eventchron::discovery
