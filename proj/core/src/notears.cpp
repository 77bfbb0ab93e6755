#include <algorithm>
#include <cmath>
#include <deque>

#include "eventchron/discovery.hpp"
#include "eventchron/error.hpp"

namespace eventchron::discovery {

WeightedAdjacency::WeightedAdjacency(std::vector<std::string> labels, Eigen::MatrixXd weights)
    : labels_(std::move(labels)), weights_(std::move(weights)) {
    const auto d = static_cast<Eigen::Index>(labels_.size());
    if (weights_.rows() != d || weights_.cols() != d) throw ValidationError("weight matrix must be d x d");
    if (!weights_.allFinite()) throw ValidationError("weight matrix has non-finite entries");
    for (Eigen::Index i = 0; i < d; ++i) {
        if (weights_(i, i) != 0.0) throw ValidationError("weight matrix diagonal must be zero");
    }
}

std::vector<bn::Edge> WeightedAdjacency::support() const {
    std::vector<bn::Edge> edges;
    for (Eigen::Index i = 0; i < weights_.rows(); ++i) {
        for (Eigen::Index j = 0; j < weights_.cols(); ++j) {
            if (weights_(i, j) != 0.0) edges.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j)});
        }
    }
    return edges;
}

Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& a, double relative_tolerance) {
    if (a.rows() != a.cols()) throw ValidationError("matrix exponential needs a square matrix");
    const auto n = a.rows();
    if (n == 0) return a;
    const double norm = a.cwiseAbs().colwise().sum().maxCoeff();
    int squarings = 0;
    if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
    const Eigen::MatrixXd b = a / std::ldexp(1.0, squarings);

    Eigen::MatrixXd sum = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
    for (int k = 1; k < 64; ++k) {
        term = term * b / static_cast<double>(k);
        sum += term;
        const double term_norm = term.cwiseAbs().colwise().sum().maxCoeff();
        const double sum_norm = sum.cwiseAbs().colwise().sum().maxCoeff();
        if (term_norm <= relative_tolerance * sum_norm) break;
    }
    for (int s = 0; s < squarings; ++s) sum = sum * sum;
    return sum;
}

AcyclicityValue acyclicity_h(const Eigen::MatrixXd& w) {
    if (w.rows() != w.cols()) throw ValidationError("acyclicity needs a square matrix");
    const Eigen::MatrixXd e = matrix_exponential(w.cwiseProduct(w));
    AcyclicityValue out;
    out.value = e.trace() - static_cast<double>(w.rows());
    out.gradient = e.transpose().cwiseProduct(2.0 * w);
    return out;
}

Eigen::MatrixXd notears_moment(const NumericData& data, bool standardize) {
    if (!data.values.allFinite()) throw ValidationError("non-finite data");
    if (data.values.rows() == 0) throw ValidationError("empty data");
    Eigen::MatrixXd x = data.values.rowwise() - data.values.colwise().mean();
    if (standardize) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            const double sd = std::sqrt(x.col(j).squaredNorm() / static_cast<double>(x.rows()));
            if (sd > 0.0) x.col(j) /= sd;
        }
    }
    return x.transpose() * x / static_cast<double>(x.rows());
}

namespace {

/// Objective over the split variables z = [vec(W+); vec(W-)].
class AugmentedObjective {
public:
    AugmentedObjective(const Eigen::MatrixXd& moment, double lambda, double rho, double alpha)
        : s_(moment), d_(moment.rows()), lambda_(lambda), rho_(rho), alpha_(alpha) {}

    Eigen::MatrixXd weights(const Eigen::VectorXd& z) const {
        const auto dd = d_ * d_;
        return Eigen::Map<const Eigen::MatrixXd>(z.data(), d_, d_) -
               Eigen::Map<const Eigen::MatrixXd>(z.data() + dd, d_, d_);
    }

    double operator()(const Eigen::VectorXd& z, Eigen::VectorXd& grad) const {
        const Eigen::MatrixXd w = weights(z);
        const Eigen::MatrixXd r = Eigen::MatrixXd::Identity(d_, d_) - w;
        const Eigen::MatrixXd sr = s_ * r;
        const double loss = 0.5 * (r.transpose() * sr).trace();
        const auto h = acyclicity_h(w);
        const double f = loss + 0.5 * rho_ * h.value * h.value + alpha_ * h.value + lambda_ * z.sum();
        const Eigen::MatrixXd g = -sr + (rho_ * h.value + alpha_) * h.gradient;
        const auto dd = d_ * d_;
        grad.resize(2 * dd);
        Eigen::Map<Eigen::MatrixXd>(grad.data(), d_, d_) = g.array() + lambda_;
        Eigen::Map<Eigen::MatrixXd>(grad.data() + dd, d_, d_) = -g.array() + lambda_;
        return f;
    }

private:
    const Eigen::MatrixXd& s_;
    Eigen::Index d_;
    double lambda_, rho_, alpha_;
};

struct SolverSettings {
    std::size_t max_iterations = 2000;
    std::size_t memory = 10;
    double pgtol = 1e-5;
    double ftol = 2.2e-9;
};

/// Limited-memory BFGS projected onto z >= 0, with the `fixed` coordinates
/// pinned at zero. Variables at the bound with an outward gradient are
/// frozen for the step.
Eigen::VectorXd minimize_nonnegative(const AugmentedObjective& fn, Eigen::VectorXd z, const std::vector<bool>& fixed,
                                     const SolverSettings& settings) {
    const auto n = z.size();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (fixed[static_cast<std::size_t>(i)] || z(i) < 0.0) z(i) = 0.0;
    }
    Eigen::VectorXd g;
    double f = fn(z, g);
    std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> history;

    for (std::size_t it = 0; it < settings.max_iterations; ++it) {
        std::vector<bool> frozen(static_cast<std::size_t>(n));
        double pg_norm = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto k = static_cast<std::size_t>(i);
            frozen[k] = fixed[k] || (z(i) <= 0.0 && g(i) > 0.0);
            if (!frozen[k]) pg_norm = std::max(pg_norm, std::abs(g(i)));
        }
        if (pg_norm < settings.pgtol) break;

        Eigen::VectorXd q = g;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (frozen[static_cast<std::size_t>(i)]) q(i) = 0.0;
        }
        const Eigen::VectorXd masked_gradient = q;
        std::vector<double> alphas(history.size());
        for (std::size_t k = history.size(); k-- > 0;) {
            const auto& [s, y] = history[k];
            alphas[k] = s.dot(q) / y.dot(s);
            q -= alphas[k] * y;
        }
        if (!history.empty()) {
            const auto& [s, y] = history.back();
            q *= s.dot(y) / y.dot(y);
        }
        for (std::size_t k = 0; k < history.size(); ++k) {
            const auto& [s, y] = history[k];
            const double beta = y.dot(q) / y.dot(s);
            q += (alphas[k] - beta) * s;
        }
        Eigen::VectorXd dir = -q;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (frozen[static_cast<std::size_t>(i)]) dir(i) = 0.0;
        }
        if (masked_gradient.dot(dir) >= 0.0) {
            history.clear();
            dir = -masked_gradient;
        }
        double step = 1.0;
        if (history.empty()) step = std::min(1.0, 1.0 / std::max(dir.cwiseAbs().maxCoeff(), 1e-12));

        Eigen::VectorXd z_new, g_new;
        double f_new = f;
        bool accepted = false;
        for (int tries = 0; tries < 50; ++tries) {
            z_new = (z + step * dir).cwiseMax(0.0);
            for (Eigen::Index i = 0; i < n; ++i) {
                if (fixed[static_cast<std::size_t>(i)]) z_new(i) = 0.0;
            }
            f_new = fn(z_new, g_new);
            if (std::isfinite(f_new) && f_new <= f + 1e-4 * g.dot(z_new - z)) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            if (history.empty()) break;
            history.clear();
            continue;
        }
        Eigen::VectorXd s = z_new - z;
        Eigen::VectorXd y = g_new - g;
        const double rel_drop = (f - f_new) / std::max({std::abs(f), std::abs(f_new), 1.0});
        z = std::move(z_new);
        g = std::move(g_new);
        f = f_new;
        if (rel_drop <= settings.ftol) break;
        if (s.dot(y) > 1e-10 * y.squaredNorm()) {
            history.emplace_back(std::move(s), std::move(y));
            if (history.size() > settings.memory) history.pop_front();
        }
    }
    return z;
}

/// Drops the weakest edges until the support is acyclic; returns the
/// threshold that was needed.
double restore_acyclicity(Eigen::MatrixXd& w, double omega) {
    const auto d = static_cast<std::size_t>(w.rows());
    std::vector<std::string> names(d);
    for (std::size_t i = 0; i < d; ++i) names[i] = std::to_string(i);
    const auto support = [&] {
        std::vector<bn::Edge> edges;
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < d; ++j) {
                if (w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) != 0.0) edges.push_back({i, j});
            }
        }
        return edges;
    };
    double used = omega;
    for (;;) {
        const auto edges = support();
        if (!bn::find_cycle(d, edges)) return used;
        double weakest = std::numeric_limits<double>::infinity();
        for (const auto& e : edges) {
            weakest = std::min(weakest, std::abs(w(static_cast<Eigen::Index>(e.from), static_cast<Eigen::Index>(e.to))));
        }
        for (const auto& e : edges) {
            auto& v = w(static_cast<Eigen::Index>(e.from), static_cast<Eigen::Index>(e.to));
            if (std::abs(v) <= weakest) v = 0.0;
        }
        used = std::nextafter(weakest, std::numeric_limits<double>::infinity());
    }
}

}  // namespace

NotearsResult notears_from_moment(const Eigen::MatrixXd& moment, const std::vector<std::string>& labels,
                                  const NotearsOptions& options) {
    const auto d = moment.rows();
    if (moment.cols() != d || static_cast<std::size_t>(d) != labels.size())
        throw ValidationError("moment matrix does not match the labels");
    if (!moment.allFinite()) throw ValidationError("non-finite data");
    if (options.lambda < 0.0 || options.omega < 0.0) throw ValidationError("lambda and omega must be non-negative");

    const auto dd = d * d;
    std::vector<bool> fixed(static_cast<std::size_t>(2 * dd), false);
    for (Eigen::Index i = 0; i < d; ++i) {
        fixed[static_cast<std::size_t>(i * d + i)] = true;
        fixed[static_cast<std::size_t>(dd + i * d + i)] = true;
    }
    SolverSettings settings;
    settings.max_iterations = options.max_inner_iterations;

    Eigen::VectorXd z = Eigen::VectorXd::Zero(2 * dd);
    double rho = 1.0, alpha = 0.0, h = std::numeric_limits<double>::infinity();
    std::size_t outer = 0;
    for (; outer < options.max_outer_iterations; ++outer) {
        Eigen::VectorXd z_new;
        double h_new = h;
        // At least one solve per outer step, even when rho_max is already reached.
        do {
            const AugmentedObjective fn(moment, options.lambda, rho, alpha);
            z_new = minimize_nonnegative(fn, z, fixed, settings);
            h_new = acyclicity_h(fn.weights(z_new)).value;
            if (h_new > options.progress_ratio * h) {
                rho *= options.rho_growth;
            } else {
                break;
            }
        } while (rho < options.rho_max);
        z = std::move(z_new);
        h = h_new;
        alpha += rho * h;
        if (h <= options.h_tol || rho >= options.rho_max) {
            ++outer;
            break;
        }
    }

    const AugmentedObjective unpack(moment, 0.0, 0.0, 0.0);
    Eigen::MatrixXd raw = unpack.weights(z);
    raw.diagonal().setZero();
    Eigen::MatrixXd w = (raw.array().abs() < options.omega).select(0.0, raw);
    const double omega_used = restore_acyclicity(w, options.omega);

    NotearsResult result{WeightedAdjacency(labels, w), raw, bn::Dag(labels, WeightedAdjacency(labels, w).support())};
    result.h = std::isfinite(h) ? h : acyclicity_h(raw).value;
    result.rho = rho;
    result.omega_used = omega_used;
    result.outer_iterations = outer;
    result.converged = result.h <= options.h_tol;
    return result;
}

NotearsResult notears_learn(const NumericData& data, const NotearsOptions& options) {
    return notears_from_moment(notears_moment(data, options.standardize), data.labels, options);
}

NotearsResult notears_learn(const data::EventMatrix& data, const NotearsOptions& options) {
    return notears_learn(NumericData::from(data), options);
}

}  // namespace eventchron::discovery
