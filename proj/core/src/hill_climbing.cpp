#include <algorithm>
#include <bit>
#include <cmath>
#include <unordered_map>

#include "eventchron/discovery.hpp"
#include "eventchron/error.hpp"

namespace eventchron::discovery {

namespace {

constexpr double kTieTolerance = 1e-9;

enum class MoveKind { Add = 0, Delete = 1, Reverse = 2 };

struct Move {
    MoveKind kind;
    std::size_t from;
    std::size_t to;
    double delta;
};

class LocalScoreCache {
public:
    explicit LocalScoreCache(const bn::BinaryData& data) : data_(data), cache_(data.columns.size()) {}

    double score(std::size_t node, std::uint64_t parent_mask) {
        auto& slot = cache_[node];
        if (auto it = slot.find(parent_mask); it != slot.end()) return it->second;
        std::vector<std::size_t> parents;
        for (std::size_t p = 0; p < data_.columns.size(); ++p) {
            if (parent_mask >> p & 1U) parents.push_back(p);
        }
        const double s = bn::bic_local_score(data_, node, parents);
        slot.emplace(parent_mask, s);
        return s;
    }

private:
    const bn::BinaryData& data_;
    std::vector<std::unordered_map<std::uint64_t, double>> cache_;
};

/// True when `to` is reachable from `from`, optionally ignoring one edge.
bool path_exists(const std::vector<std::uint64_t>& children, std::size_t from, std::size_t to,
                 std::size_t skip_from = SIZE_MAX, std::size_t skip_to = SIZE_MAX) {
    std::uint64_t seen = 0;
    std::vector<std::size_t> stack{from};
    while (!stack.empty()) {
        const auto v = stack.back();
        stack.pop_back();
        std::uint64_t next = children[v];
        if (v == skip_from) next &= ~(std::uint64_t{1} << skip_to);
        for (std::size_t c = 0; next; ++c, next >>= 1) {
            if (!(next & 1U)) continue;
            if (c == to) return true;
            if (!(seen >> c & 1U)) {
                seen |= std::uint64_t{1} << c;
                stack.push_back(c);
            }
        }
    }
    return false;
}

}  // namespace

HcResult hc_learn_traced(const data::EventMatrix& data, const HcOptions& options) {
    const std::size_t d = data.cols();
    if (d < 2) throw ValidationError("hill climbing needs at least two columns");
    if (d > 64) throw ValidationError("hill climbing supports at most 64 variables");
    const auto bin = bn::BinaryData::from(data);
    LocalScoreCache cache(bin);

    std::vector<std::uint64_t> parents(d, 0), children(d, 0);
    std::vector<double> local(d);
    for (std::size_t v = 0; v < d; ++v) local[v] = cache.score(v, 0);
    double total = 0.0;
    for (double s : local) total += s;

    HcResult result{bn::Dag::empty(data.columns()), {total}};
    const auto indegree_ok = [&](std::uint64_t mask) {
        return !options.max_indegree ||
               static_cast<std::size_t>(std::popcount(mask)) <= *options.max_indegree;
    };

    for (;;) {
        std::optional<Move> best;
        // Score-equivalent moves differ only by rounding; treat them as tied so
        // the canonical order decides.
        const auto consider = [&](Move m) {
            if (!best || m.delta > best->delta + kTieTolerance * std::max(1.0, std::abs(best->delta))) best = m;
        };
        for (int kind = 0; kind < 3; ++kind) {
            for (std::size_t u = 0; u < d; ++u) {
                for (std::size_t v = 0; v < d; ++v) {
                    if (u == v) continue;
                    const std::uint64_t ubit = std::uint64_t{1} << u;
                    const std::uint64_t vbit = std::uint64_t{1} << v;
                    const bool has_uv = parents[v] & ubit;
                    const bool has_vu = parents[u] & vbit;
                    switch (static_cast<MoveKind>(kind)) {
                        case MoveKind::Add: {
                            if (has_uv || has_vu) break;
                            const auto np = parents[v] | ubit;
                            if (!indegree_ok(np)) break;
                            if (path_exists(children, v, u)) break;
                            consider({MoveKind::Add, u, v, cache.score(v, np) - local[v]});
                            break;
                        }
                        case MoveKind::Delete: {
                            if (!has_uv) break;
                            consider({MoveKind::Delete, u, v, cache.score(v, parents[v] & ~ubit) - local[v]});
                            break;
                        }
                        case MoveKind::Reverse: {
                            if (!has_uv) break;
                            const auto nu = parents[u] | vbit;
                            if (!indegree_ok(nu)) break;
                            if (path_exists(children, u, v, u, v)) break;
                            const double delta = cache.score(v, parents[v] & ~ubit) - local[v] +
                                                 cache.score(u, nu) - local[u];
                            consider({MoveKind::Reverse, u, v, delta});
                            break;
                        }
                    }
                }
            }
        }
        if (!best || best->delta <= options.min_improvement) break;

        const auto [kind, u, v, delta] = *best;
        const std::uint64_t ubit = std::uint64_t{1} << u;
        const std::uint64_t vbit = std::uint64_t{1} << v;
        if (kind == MoveKind::Add) {
            parents[v] |= ubit;
            children[u] |= vbit;
        } else {
            parents[v] &= ~ubit;
            children[u] &= ~vbit;
            if (kind == MoveKind::Reverse) {
                parents[u] |= vbit;
                children[v] |= ubit;
                local[u] = cache.score(u, parents[u]);
            }
        }
        local[v] = cache.score(v, parents[v]);
        total = 0.0;
        for (double s : local) total += s;
        result.score_trace.push_back(total);
    }

    std::vector<bn::Edge> edges;
    for (std::size_t v = 0; v < d; ++v) {
        for (std::size_t u = 0; u < d; ++u) {
            if (parents[v] >> u & 1U) edges.push_back({u, v});
        }
    }
    result.dag = bn::Dag(data.columns(), std::move(edges));
    return result;
}

bn::Dag hc_learn(const data::EventMatrix& data, const HcOptions& options, std::uint64_t /*seed*/) {
    return hc_learn_traced(data, options).dag;
}

}  // namespace eventchron::discovery
