#include <algorithm>
#include <cmath>
#include <numbers>

#include "eventchron/discovery.hpp"
#include "eventchron/error.hpp"

namespace eventchron::discovery {

namespace {

constexpr double kTinyVariance = 1e-12;

double variance(const Eigen::VectorXd& v) {
    const double mean = v.mean();
    return (v.array() - mean).square().mean();
}

Eigen::VectorXd standardized(const Eigen::VectorXd& v) {
    const double sd = std::sqrt(variance(v));
    return (v.array() - v.mean()) / sd;
}

/// Maximum-entropy approximation of differential entropy for a
/// unit-variance sample.
double entropy(const Eigen::VectorXd& u) {
    constexpr double k1 = 79.047;
    constexpr double k2 = 7.4129;
    constexpr double gamma = 0.37457;
    const double log_cosh = u.array().cosh().log().mean() - gamma;
    const double gauss = (u.array() * (-u.array().square() / 2.0).exp()).mean();
    return (1.0 + std::log(2.0 * std::numbers::pi)) / 2.0 - k1 * log_cosh * log_cosh - k2 * gauss * gauss;
}

/// Residual of x after regressing out y; both centered.
Eigen::VectorXd residual(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    const double var_y = variance(y);
    if (var_y < kTinyVariance) return x;
    const double cov = ((x.array() - x.mean()) * (y.array() - y.mean())).mean();
    return x - (cov / var_y) * y;
}

/// Positive when x -> y is the more plausible direction.
std::optional<double> direction_score(const Eigen::VectorXd& xi, const Eigen::VectorXd& xj) {
    const Eigen::VectorXd ri = residual(xi, xj);
    const Eigen::VectorXd rj = residual(xj, xi);
    const double vi = variance(ri);
    const double vj = variance(rj);
    if (vi < kTinyVariance || vj < kTinyVariance) return std::nullopt;
    return (entropy(xj) + entropy(ri / std::sqrt(vi))) - (entropy(xi) + entropy(rj / std::sqrt(vj)));
}

}  // namespace

LingamResult lingam_learn(const NumericData& data, const LingamOptions& options) {
    const auto d = static_cast<std::size_t>(data.values.cols());
    const auto n = data.values.rows();
    if (d != data.labels.size()) throw ValidationError("label count does not match the data");
    if (d == 0 || n == 0) throw ValidationError("empty data");
    if (!data.values.allFinite()) throw ValidationError("non-finite data");

    LingamResult result;
    result.coefficients = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));

    std::vector<bool> constant(d, false);
    for (std::size_t i = 0; i < d; ++i) {
        if (variance(data.values.col(static_cast<Eigen::Index>(i))) < kTinyVariance) {
            constant[i] = true;
            result.causal_order.push_back(i);
        }
    }

    Eigen::MatrixXd work = data.values;
    std::vector<std::size_t> remaining;
    for (std::size_t i = 0; i < d; ++i) {
        if (!constant[i]) remaining.push_back(i);
    }

    while (!remaining.empty()) {
        std::size_t best = remaining.front();
        if (remaining.size() > 1) {
            std::vector<Eigen::VectorXd> std_cols;
            std::vector<bool> flat;
            for (auto i : remaining) {
                const Eigen::VectorXd col = work.col(static_cast<Eigen::Index>(i));
                const bool is_flat = variance(col) < kTinyVariance;
                flat.push_back(is_flat);
                std_cols.push_back(is_flat ? col : standardized(col));
            }
            double best_m = std::numeric_limits<double>::infinity();
            for (std::size_t a = 0; a < remaining.size(); ++a) {
                double m = 0.0;
                if (!flat[a]) {
                    for (std::size_t b = 0; b < remaining.size(); ++b) {
                        if (a == b || flat[b]) continue;
                        if (auto s = direction_score(std_cols[a], std_cols[b])) {
                            const double neg = std::min(0.0, *s);
                            m += neg * neg;
                        }
                    }
                }
                if (m < best_m) {
                    best_m = m;
                    best = remaining[a];
                }
            }
        }
        const Eigen::VectorXd chosen = work.col(static_cast<Eigen::Index>(best));
        for (auto i : remaining) {
            if (i == best) continue;
            work.col(static_cast<Eigen::Index>(i)) = residual(work.col(static_cast<Eigen::Index>(i)), chosen);
        }
        result.causal_order.push_back(best);
        remaining.erase(std::find(remaining.begin(), remaining.end(), best));
    }

    // Standardized OLS of each node on its non-constant order predecessors.
    Eigen::MatrixXd z(n, static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i) {
        const auto c = static_cast<Eigen::Index>(i);
        z.col(c) = constant[i] ? Eigen::VectorXd::Zero(n) : standardized(data.values.col(c));
    }
    std::vector<bn::Edge> edges;
    for (std::size_t pos = 1; pos < d; ++pos) {
        const auto target = result.causal_order[pos];
        if (constant[target]) continue;
        std::vector<std::size_t> preds;
        for (std::size_t k = 0; k < pos; ++k) {
            if (!constant[result.causal_order[k]]) preds.push_back(result.causal_order[k]);
        }
        if (preds.empty()) continue;
        Eigen::MatrixXd design(n, static_cast<Eigen::Index>(preds.size()));
        for (std::size_t k = 0; k < preds.size(); ++k) {
            design.col(static_cast<Eigen::Index>(k)) = z.col(static_cast<Eigen::Index>(preds[k]));
        }
        const Eigen::VectorXd beta =
            design.completeOrthogonalDecomposition().solve(z.col(static_cast<Eigen::Index>(target)));
        for (std::size_t k = 0; k < preds.size(); ++k) {
            const double b = beta(static_cast<Eigen::Index>(k));
            result.coefficients(static_cast<Eigen::Index>(target), static_cast<Eigen::Index>(preds[k])) = b;
            if (std::abs(b) > options.coefficient_threshold) edges.push_back({preds[k], target});
        }
    }
    result.dag = bn::Dag(data.labels, std::move(edges));
    return result;
}

bn::Dag lingam_learn(const data::EventMatrix& data, const LingamOptions& options) {
    return lingam_learn(NumericData::from(data), options).dag;
}

}  // namespace eventchron::discovery
