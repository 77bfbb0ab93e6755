#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include <nlohmann/json.hpp>

#include "eventchron/discovery.hpp"
#include "eventchron/error.hpp"
#include "eventchron/rng.hpp"

namespace eventchron::discovery {

std::vector<double> log_grid(double lo, double hi, std::size_t count) {
    if (!(lo > 0.0) || !(hi >= lo) || count == 0) throw ValidationError("invalid log grid");
    if (count == 1) return {lo};
    std::vector<double> grid(count);
    const double a = std::log(lo), b = std::log(hi);
    for (std::size_t k = 0; k < count; ++k) {
        grid[k] = std::exp(a + (b - a) * static_cast<double>(k) / static_cast<double>(count - 1));
    }
    grid.front() = lo;
    grid.back() = hi;
    return grid;
}

namespace {

struct Cell {
    bool failed = false;
    std::vector<bn::Edge> edges;
};

}  // namespace

StabilityReport stability_select(const NumericData& data, const StabilityOptions& options) {
    const auto& grid = options.lambda_grid;
    if (grid.empty()) throw ValidationError("lambda grid is empty");
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (!(grid[k] > 0.0) || (k > 0 && grid[k] <= grid[k - 1]))
            throw ValidationError("lambda grid must be positive and ascending");
    }
    if (options.n_resamples == 0) throw ValidationError("need at least one resample");
    if (!(options.subsample_fraction > 0.0 && options.subsample_fraction <= 1.0))
        throw ValidationError("subsample fraction must lie in (0, 1]");
    if (options.window == 0) throw ValidationError("window must be positive");

    const auto n = static_cast<std::size_t>(data.values.rows());
    const auto d = static_cast<std::size_t>(data.values.cols());
    const auto m = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(options.subsample_fraction * static_cast<double>(n) - 1e-9)));

    // One subsample per resample index, shared across the grid.
    std::vector<Eigen::MatrixXd> moments(options.n_resamples);
    std::vector<bool> moment_failed(options.n_resamples, false);
    for (std::size_t r = 0; r < options.n_resamples; ++r) {
        Rng rng(derive_seed(options.seed, "stability-subsample", r));
        auto rows = rng.sample_without_replacement(n, m);
        std::sort(rows.begin(), rows.end());
        NumericData sub{data.labels, Eigen::MatrixXd(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(d))};
        for (std::size_t i = 0; i < m; ++i) {
            sub.values.row(static_cast<Eigen::Index>(i)) = data.values.row(static_cast<Eigen::Index>(rows[i]));
        }
        try {
            moments[r] = notears_moment(sub, options.notears.standardize);
        } catch (const Error&) {
            moment_failed[r] = true;
        }
    }

    const std::size_t total = grid.size() * options.n_resamples;
    std::vector<Cell> cells(total);
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t t; (t = next.fetch_add(1)) < total;) {
            const std::size_t k = t / options.n_resamples, r = t % options.n_resamples;
            if (moment_failed[r]) {
                cells[t].failed = true;
                continue;
            }
            NotearsOptions opts = options.notears;
            opts.lambda = grid[k];
            try {
                cells[t].edges = notears_from_moment(moments[r], data.labels, opts).dag.edges();
            } catch (const std::exception&) {
                cells[t].failed = true;
            }
        }
    };
    const std::size_t jobs = std::clamp<std::size_t>(options.jobs, 1, total);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    }

    StabilityReport report;
    report.labels = data.labels;
    report.lambda_grid = grid;
    const auto dim = static_cast<Eigen::Index>(d);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        Eigen::MatrixXd freq = Eigen::MatrixXd::Zero(dim, dim);
        std::size_t ok = 0, failed = 0, edge_total = 0;
        for (std::size_t r = 0; r < options.n_resamples; ++r) {
            const auto& cell = cells[k * options.n_resamples + r];
            if (cell.failed) {
                ++failed;
                continue;
            }
            ++ok;
            edge_total += cell.edges.size();
            for (const auto& e : cell.edges) freq(static_cast<Eigen::Index>(e.from), static_cast<Eigen::Index>(e.to)) += 1.0;
        }
        if (ok > 0) freq /= static_cast<double>(ok);
        report.edge_frequencies.push_back(freq);
        report.failed_cells.push_back(failed);
        report.mean_edge_count.push_back(ok > 0 ? static_cast<double>(edge_total) / static_cast<double>(ok) : 0.0);
    }

    const bool single = grid.size() == 1;
    std::size_t n_eligible = 0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const bool e = (single || k > 0) && report.mean_edge_count[k] > 0.0 && report.failed_cells[k] < options.n_resamples;
        report.eligible.push_back(e);
        n_eligible += e ? 1 : 0;
    }
    const std::size_t window = single ? std::min(options.window, n_eligible) : options.window;

    std::vector<std::pair<bn::Edge, double>> stable;
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            if (i == j || window == 0) continue;
            std::size_t run = 0;
            bool hit = false;
            double freq_sum = 0.0;
            std::size_t freq_n = 0;
            for (std::size_t k = 0; k < grid.size(); ++k) {
                const double f = report.edge_frequencies[k](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                if (report.eligible[k]) {
                    freq_sum += f;
                    ++freq_n;
                }
                run = (report.eligible[k] && f >= options.frequency_threshold) ? run + 1 : 0;
                if (run >= window) hit = true;
            }
            if (hit) stable.push_back({{i, j}, freq_sum / static_cast<double>(std::max<std::size_t>(freq_n, 1))});
        }
    }

    // Break any cycle by dropping its least frequent edge.
    for (;;) {
        std::vector<bn::Edge> edges;
        for (const auto& [e, f] : stable) edges.push_back(e);
        const auto cycle = bn::find_cycle(d, edges);
        if (!cycle) break;
        std::size_t worst = stable.size();
        for (std::size_t c = 0; c < cycle->size(); ++c) {
            const bn::Edge e{(*cycle)[c], (*cycle)[(c + 1) % cycle->size()]};
            for (std::size_t s = 0; s < stable.size(); ++s) {
                if (stable[s].first == e && (worst == stable.size() || stable[s].second < stable[worst].second)) worst = s;
            }
        }
        if (worst == stable.size()) throw Error("cycle repair found no edge to drop");
        report.dropped_for_cycles.push_back(stable[worst].first);
        stable.erase(stable.begin() + static_cast<std::ptrdiff_t>(worst));
    }
    for (const auto& [e, f] : stable) report.stable_edges.push_back(e);
    report.dag = bn::Dag(data.labels, report.stable_edges);
    return report;
}

StabilityReport stability_select(const data::EventMatrix& data, const StabilityOptions& options) {
    return stability_select(NumericData::from(data), options);
}

std::string StabilityReport::to_json() const {
    nlohmann::ordered_json j;
    j["labels"] = labels;
    j["lambda_grid"] = lambda_grid;
    j["mean_edge_count"] = mean_edge_count;
    j["eligible"] = eligible;
    j["failed_cells"] = failed_cells;
    auto freqs = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < labels.size(); ++i) {
        for (std::size_t k = 0; k < labels.size(); ++k) {
            if (i == k) continue;
            std::vector<double> row;
            bool any = false;
            for (const auto& f : edge_frequencies) {
                const double v = f(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
                row.push_back(v);
                any = any || v > 0.0;
            }
            if (!any) continue;
            nlohmann::ordered_json e;
            e["from"] = labels[i];
            e["to"] = labels[k];
            e["frequency"] = row;
            freqs.push_back(e);
        }
    }
    j["edge_frequencies"] = freqs;
    const auto edge_list = [&](const std::vector<bn::Edge>& edges) {
        auto a = nlohmann::ordered_json::array();
        for (const auto& e : edges) a.push_back({labels[e.from], labels[e.to]});
        return a;
    };
    j["stable_edges"] = edge_list(stable_edges);
    j["dropped_for_cycles"] = edge_list(dropped_for_cycles);
    return j.dump(2);
}

}  // namespace eventchron::discovery
