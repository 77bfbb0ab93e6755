#include "eventchron/bayesnet.hpp"

#include <cmath>
#include <string>

#include "eventchron/error.hpp"
#include "eventchron/rng.hpp"

namespace eventchron::bn {

DiscreteBayesNet::DiscreteBayesNet(Dag dag, std::vector<Cpt> cpts) : dag_(std::move(dag)), cpts_(std::move(cpts)) {
    if (cpts_.size() != dag_.size()) throw ValidationError("one CPT per node required");
    for (std::size_t v = 0; v < cpts_.size(); ++v) {
        const auto& c = cpts_[v];
        if (c.node != v) throw ValidationError("CPT order must follow node order");
        auto sorted = c.parents;
        std::sort(sorted.begin(), sorted.end());
        if (sorted != dag_.parents(v)) {
            throw ValidationError("CPT parents of '" + dag_.label(v) + "' differ from the DAG");
        }
        if (c.p1.size() != c.assignments()) {
            throw ValidationError("CPT of '" + dag_.label(v) + "' must cover every parent assignment");
        }
        for (double p : c.p1) {
            if (!(p >= 0.0 && p <= 1.0)) {
                throw ValidationError("CPT of '" + dag_.label(v) + "' has a probability outside [0,1]");
            }
        }
    }
}

double DiscreteBayesNet::joint(std::span<const std::uint8_t> values) const {
    double p = 1.0;
    for (const auto& c : cpts_) p *= c.prob(values[c.node] != 0, c.assignment_index(values));
    return p;
}

DiscreteBayesNet DiscreteBayesNet::intervened(std::size_t node, bool value) const {
    auto edges = dag_.edges();
    std::erase_if(edges, [node](const Edge& e) { return e.to == node; });
    auto cpts = cpts_;
    cpts.at(node) = Cpt{node, {}, {value ? 1.0 : 0.0}};
    return DiscreteBayesNet(Dag(dag_.nodes(), std::move(edges)), std::move(cpts));
}

BinaryData BinaryData::from(const data::EventMatrix& m, const std::vector<std::string>& labels) {
    BinaryData d;
    d.n_rows = m.rows();
    d.columns.reserve(labels.size());
    for (const auto& l : labels) d.columns.push_back(m.binary_column(m.column_index(l)));
    return d;
}

std::vector<std::array<std::size_t, 2>> family_counts(const BinaryData& d, std::size_t node,
                                                      std::span<const std::size_t> parents) {
    std::vector<std::array<std::size_t, 2>> counts(std::size_t{1} << parents.size(), {0, 0});
    const auto& x = d.columns.at(node);
    if (parents.empty()) {
        for (std::size_t r = 0; r < d.n_rows; ++r) ++counts[0][x[r]];
        return counts;
    }
    std::vector<std::size_t> idx(d.n_rows, 0);
    for (auto p : parents) {
        const auto& col = d.columns.at(p);
        for (std::size_t r = 0; r < d.n_rows; ++r) idx[r] = (idx[r] << 1) | col[r];
    }
    for (std::size_t r = 0; r < d.n_rows; ++r) ++counts[idx[r]][x[r]];
    return counts;
}

DiscreteBayesNet fit_cpts(const Dag& g, const BinaryData& data, double ess) {
    if (ess < 0.0) throw ValidationError("ess must be non-negative");
    if (data.columns.size() != g.size()) throw ValidationError("data columns do not match DAG nodes");
    std::vector<Cpt> cpts;
    cpts.reserve(g.size());
    for (std::size_t v = 0; v < g.size(); ++v) {
        Cpt c{v, g.parents(v), {}};
        const auto counts = family_counts(data, v, c.parents);
        c.p1.resize(counts.size());
        for (std::size_t a = 0; a < counts.size(); ++a) {
            const double n = static_cast<double>(counts[a][0] + counts[a][1]);
            const double denom = n + ess;
            c.p1[a] = denom > 0.0 ? (static_cast<double>(counts[a][1]) + ess / 2.0) / denom : 0.5;
        }
        cpts.push_back(std::move(c));
    }
    return DiscreteBayesNet(g, std::move(cpts));
}

DiscreteBayesNet fit_cpts(const Dag& g, const data::EventMatrix& data, double ess) {
    return fit_cpts(g, BinaryData::from(data, g.nodes()), ess);
}

double log_likelihood(const DiscreteBayesNet& bn, const data::EventMatrix& data, double floor) {
    const auto d = BinaryData::from(data, bn.dag().nodes());
    double ll = 0.0;
    for (const auto& c : bn.cpts()) {
        const auto counts = family_counts(d, c.node, c.parents);
        for (std::size_t a = 0; a < counts.size(); ++a) {
            for (int v = 0; v < 2; ++v) {
                if (counts[a][v] == 0) continue;
                const double p = std::max(c.prob(v == 1, a), floor);
                ll += static_cast<double>(counts[a][v]) * std::log(p);
            }
        }
    }
    return ll;
}

double bic_local_score(const BinaryData& d, std::size_t node, std::span<const std::size_t> parents) {
    const auto counts = family_counts(d, node, parents);
    double ll = 0.0;
    for (const auto& c : counts) {
        const double n = static_cast<double>(c[0] + c[1]);
        for (auto k : c) {
            if (k > 0) ll += static_cast<double>(k) * std::log(static_cast<double>(k) / n);
        }
    }
    const double free_params = static_cast<double>(counts.size());
    return ll - 0.5 * free_params * std::log(static_cast<double>(d.n_rows));
}

double bic_score(const Dag& g, const BinaryData& data) {
    double s = 0.0;
    for (std::size_t v = 0; v < g.size(); ++v) s += bic_local_score(data, v, g.parents(v));
    return s;
}

double bic_score(const Dag& g, const data::EventMatrix& data) {
    return bic_score(g, BinaryData::from(data, g.nodes()));
}

data::EventMatrix sample(const DiscreteBayesNet& bn, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw ValidationError("sample size must be positive");
    Rng rng(seed);
    const auto order = bn.dag().topological_order();
    const std::size_t d = bn.size();
    std::vector<std::vector<std::uint8_t>> cols(d, std::vector<std::uint8_t>(n));
    std::vector<std::uint8_t> row(d);
    for (std::size_t r = 0; r < n; ++r) {
        for (auto v : order) {
            const auto& c = bn.cpt(v);
            row[v] = rng.bernoulli(c.p1[c.assignment_index(row)]) ? 1 : 0;
            cols[v][r] = row[v];
        }
    }
    return data::EventMatrix::from_columns(bn.dag().nodes(), cols, "sampled");
}

}  // namespace eventchron::bn
