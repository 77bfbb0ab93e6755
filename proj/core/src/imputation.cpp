#include "eventchron/imputation.hpp"

#include <algorithm>
#include <bit>
#include <set>

#include <nlohmann/json.hpp>

#include "eventchron/error.hpp"
#include "eventchron/rng.hpp"

namespace eventchron::imputation {

using data::Cell;

InitialMethod parse_initial_method(const std::string& name) {
    if (name == "mode") return InitialMethod::Mode;
    if (name == "round_robin" || name == "round-robin") return InitialMethod::RoundRobin;
    throw ValidationError("unknown imputation method '" + name + "'");
}

std::string initial_method_name(InitialMethod m) { return m == InitialMethod::Mode ? "mode" : "round_robin"; }

bool column_mode(const data::EventMatrix& m, std::size_t c) {
    std::size_t ones = 0, zeros = 0;
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const auto v = m.at(r, c);
        if (v == Cell::One) ++ones;
        if (v == Cell::Zero) ++zeros;
    }
    return ones > zeros;
}

namespace {

void require_observed_columns(const data::EventMatrix& m) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
        bool any = false;
        for (std::size_t r = 0; r < m.rows() && !any; ++r) any = m.at(r, c) != Cell::Missing;
        if (!any) throw ValidationError("column '" + m.columns()[c] + "' is fully missing");
    }
}

data::EventMatrix round_robin(const data::EventMatrix& m, const RoundRobinOptions& options) {
    const std::size_t n = m.rows(), d = m.cols();
    std::vector<Cell> cells = m.cells();
    std::vector<bool> complete(d, true);
    std::vector<bool> mode(d);
    for (std::size_t c = 0; c < d; ++c) {
        mode[c] = column_mode(m, c);
        for (std::size_t r = 0; r < n; ++r) {
            if (m.at(r, c) == Cell::Missing) complete[c] = false;
        }
    }
    const std::size_t k_max = std::max<std::size_t>(options.neighbours, 1);

    for (std::size_t sweep = 0; sweep < options.sweeps; ++sweep) {
        for (std::size_t c = 0; c < d; ++c) {
            std::vector<std::size_t> donors, targets;
            for (std::size_t r = 0; r < n; ++r) (m.at(r, c) == Cell::Missing ? targets : donors).push_back(r);
            if (targets.empty()) continue;

            // Distances only use columns complete right now, as packed bit rows.
            std::vector<std::size_t> features;
            for (std::size_t j = 0; j < d; ++j) {
                if (j != c && complete[j]) features.push_back(j);
            }
            const std::size_t words = (features.size() + 63) / 64;
            std::vector<std::uint64_t> bits(n * std::max<std::size_t>(words, 1), 0);
            for (std::size_t r = 0; r < n; ++r) {
                for (std::size_t f = 0; f < features.size(); ++f) {
                    if (cells[r * d + features[f]] == Cell::One) bits[r * words + f / 64] |= std::uint64_t{1} << (f % 64);
                }
            }

            std::vector<Cell> predicted(targets.size());
            std::vector<std::pair<std::size_t, std::size_t>> dist(donors.size());
            for (std::size_t t = 0; t < targets.size(); ++t) {
                const auto r = targets[t];
                for (std::size_t i = 0; i < donors.size(); ++i) {
                    std::size_t h = 0;
                    for (std::size_t w = 0; w < words; ++w) h += std::popcount(bits[r * words + w] ^ bits[donors[i] * words + w]);
                    dist[i] = {h, donors[i]};
                }
                const std::size_t k = std::min(k_max, dist.size());
                std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
                std::size_t ones = 0;
                for (std::size_t i = 0; i < k; ++i) ones += m.at(dist[i].second, c) == Cell::One ? 1 : 0;
                bool value = mode[c];
                if (2 * ones != k) value = 2 * ones > k;
                predicted[t] = value ? Cell::One : Cell::Zero;
            }
            for (std::size_t t = 0; t < targets.size(); ++t) cells[targets[t] * d + c] = predicted[t];
            complete[c] = true;
        }
    }
    return m.with_cells(std::move(cells));
}

}  // namespace

data::EventMatrix initial_impute(const data::EventMatrix& m, InitialMethod method, const RoundRobinOptions& options) {
    require_observed_columns(m);
    if (m.is_complete()) return m;
    if (method == InitialMethod::RoundRobin && options.sweeps > 0) return round_robin(m, options);
    std::vector<Cell> cells = m.cells();
    for (std::size_t c = 0; c < m.cols(); ++c) {
        const Cell fill = column_mode(m, c) ? Cell::One : Cell::Zero;
        for (std::size_t r = 0; r < m.rows(); ++r) {
            if (cells[r * m.cols() + c] == Cell::Missing) cells[r * m.cols() + c] = fill;
        }
    }
    return m.with_cells(std::move(cells));
}

double edge_change_fraction(const bn::Dag& a, const bn::Dag& b) {
    if (std::set(a.nodes().begin(), a.nodes().end()) != std::set(b.nodes().begin(), b.nodes().end()))
        throw ValidationError("edge change needs graphs over the same nodes");
    std::set<std::pair<std::string, std::string>> ea, eb;
    for (const auto& e : a.labeled_edges()) ea.insert(e);
    for (const auto& e : b.labeled_edges()) eb.insert(e);
    std::size_t common = 0;
    for (const auto& e : ea) common += eb.count(e);
    const std::size_t uni = ea.size() + eb.size() - common;
    const std::size_t diff = uni - common;
    return static_cast<double>(diff) / static_cast<double>(std::max<std::size_t>(uni, 1));
}

ImputationResult em_impute(const data::EventMatrix& m, const discovery::Learner& learner, const EmOptions& options) {
    if (!learner) throw ValidationError("no learner supplied");
    if (options.max_iterations == 0) throw ValidationError("max_iterations must be positive");
    const std::uint64_t learner_seed = derive_seed(options.seed, "em-learner");
    const auto learn = [&](const data::EventMatrix& current, std::size_t iteration) {
        try {
            return learner(current, learner_seed);
        } catch (const std::exception& e) {
            throw Error("structure learning failed at EM iteration " + std::to_string(iteration) + ": " + e.what());
        }
    };

    data::EventMatrix current = initial_impute(m, options.initial);
    bn::Dag g_prev = learn(current, 0);
    auto model = bn::fit_cpts(g_prev, current, options.ess);
    if (m.is_complete()) return ImputationResult{current, std::move(model), 1, {0.0}, true};

    const std::size_t d = m.cols();
    std::vector<bool> mode(d);
    for (std::size_t c = 0; c < d; ++c) mode[c] = column_mode(m, c);

    ImputationResult result{current, model, 0, {}, false};
    for (std::size_t it = 1; it <= options.max_iterations; ++it) {
        // Node i of the model is column i; learners keep the column order.
        std::vector<std::size_t> col_of(d);
        for (std::size_t i = 0; i < d; ++i) col_of[i] = current.column_index(model.dag().label(i));

        std::vector<Cell> cells = current.cells();
        std::vector<std::uint8_t> row_values(d);
        for (std::size_t r = 0; r < m.rows(); ++r) {
            bool row_missing = false;
            for (std::size_t c = 0; c < d && !row_missing; ++c) row_missing = m.at(r, c) == Cell::Missing;
            if (!row_missing) continue;
            for (std::size_t i = 0; i < d; ++i) row_values[i] = current.at(r, col_of[i]) == Cell::One ? 1 : 0;
            for (std::size_t i = 0; i < d; ++i) {
                const auto c = col_of[i];
                if (m.at(r, c) != Cell::Missing) continue;
                const auto& cpt = model.cpt(i);
                const double p = cpt.p1[cpt.assignment_index(row_values)];
                const bool value = p == 0.5 ? mode[c] : p > 0.5;
                cells[r * d + c] = value ? Cell::One : Cell::Zero;
            }
        }
        current = current.with_cells(std::move(cells));

        bn::Dag g = learn(current, it);
        model = bn::fit_cpts(g, current, options.ess);
        const double change = edge_change_fraction(g_prev, g);
        result.edge_change_history.push_back(change);
        g_prev = std::move(g);
        if (change < options.tolerance) {
            result.converged = true;
            break;
        }
    }
    result.completed = std::move(current);
    result.model = std::move(model);
    result.iterations = result.edge_change_history.size();
    return result;
}

std::string ImputationResult::report_json() const {
    nlohmann::ordered_json j;
    j["iterations"] = iterations;
    j["edge_change_history"] = edge_change_history;
    j["converged"] = converged;
    return j.dump(2);
}

}  // namespace eventchron::imputation
