#ifndef EVENTCHRON_DISCOVERY_HPP
#define EVENTCHRON_DISCOVERY_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eventchron/bayesnet.hpp"
#include "eventchron/dag.hpp"
#include "eventchron/dataset.hpp"
#include "eventchron/stats.hpp"

namespace eventchron::discovery {

/// Real-valued observations, one column per variable.
struct NumericData {
    std::vector<std::string> labels;
    Eigen::MatrixXd values;  // rows x variables

    /// 0/1 encoding of a complete event matrix.
    static NumericData from(const data::EventMatrix& m);
};

// ---------------------------------------------------------------- hill climbing

struct HcOptions {
    std::optional<std::size_t> max_indegree;
    /// Minimum score gain for a move to be accepted.
    double min_improvement = 1e-9;
};

struct HcResult {
    bn::Dag dag;
    /// Total BIC after each accepted move; front() is the empty graph.
    std::vector<double> score_trace;
};

/// Greedy best-improvement search over single-edge additions, deletions and
/// reversals scored by BIC, from the empty graph to a local optimum. Equal
/// gains are resolved by the first move in (kind, from, to) order.
HcResult hc_learn_traced(const data::EventMatrix& data, const HcOptions& options = {});
bn::Dag hc_learn(const data::EventMatrix& data, const HcOptions& options = {}, std::uint64_t seed = 0);

// ---------------------------------------------------------------- PC

struct PcOptions {
    double alpha = 0.05;
    std::optional<std::size_t> max_condition_size;
};

struct PcResult {
    bn::Dag dag;
    /// Edges whose direction was fixed only by column order when extending
    /// the CPDAG; lower confidence.
    std::vector<bn::Edge> order_forced;
    /// Separating set for each removed pair (i < j).
    std::map<std::pair<std::size_t, std::size_t>, std::vector<std::size_t>> sepsets;
};

/// Order-independent skeleton search, collider orientation from separating
/// sets, Meek rules R1-R3, then extension of the remaining undirected edges
/// along the column order.
PcResult pc_learn_detailed(const data::EventMatrix& data, const PcOptions& options = {});
bn::Dag pc_learn(const data::EventMatrix& data, double alpha = 0.05);

// ---------------------------------------------------------------- LiNGAM

struct LingamOptions {
    /// Absolute standardized coefficient needed to keep an edge.
    double coefficient_threshold = 0.1;
};

struct LingamResult {
    bn::Dag dag;
    std::vector<std::size_t> causal_order;
    /// coefficients(i, j): standardized effect of j on i.
    Eigen::MatrixXd coefficients;
};

/// Direct ordering: repeatedly pick the most exogenous variable with the
/// pairwise entropy-based measure, regress it out of the rest, then keep
/// edges from order predecessors whose standardized OLS coefficient clears
/// the threshold.
LingamResult lingam_learn(const NumericData& data, const LingamOptions& options = {});
bn::Dag lingam_learn(const data::EventMatrix& data, const LingamOptions& options = {});

// ---------------------------------------------------------------- NOTEARS

/// d x d weight matrix with zero diagonal.
class WeightedAdjacency {
public:
    WeightedAdjacency(std::vector<std::string> labels, Eigen::MatrixXd weights);
    const std::vector<std::string>& labels() const { return labels_; }
    const Eigen::MatrixXd& weights() const { return weights_; }
    /// Nonzero entries as edges (row = parent, column = child).
    std::vector<bn::Edge> support() const;

private:
    std::vector<std::string> labels_;
    Eigen::MatrixXd weights_;
};

struct AcyclicityValue {
    double value = 0.0;
    Eigen::MatrixXd gradient;
};

/// h(W) = tr(exp(W o W)) - d and its gradient exp(W o W)^T o 2W.
AcyclicityValue acyclicity_h(const Eigen::MatrixXd& w);

/// exp(A) by scaling and squaring of a Taylor series.
Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& a, double relative_tolerance = 1e-12);

struct NotearsOptions {
    double lambda = 0.1;
    double omega = 0.3;
    bool standardize = false;
    double h_tol = 1e-8;
    double rho_max = 1e16;
    double rho_growth = 10.0;
    /// h must shrink below this fraction of its previous value to keep rho.
    double progress_ratio = 0.25;
    std::size_t max_outer_iterations = 100;
    std::size_t max_inner_iterations = 2000;
};

struct NotearsResult {
    WeightedAdjacency weights;  // after thresholding
    Eigen::MatrixXd raw_weights;
    bn::Dag dag;
    double h = 0.0;
    double rho = 0.0;
    double omega_used = 0.0;
    std::size_t outer_iterations = 0;
    bool converged = false;
};

/// Augmented-Lagrangian NOTEARS with a bounded quasi-Newton inner solver on
/// the split W = W+ - W-. Failure to reach h_tol is reported through
/// `converged` and `h`, not thrown.
NotearsResult notears_learn(const NumericData& data, const NotearsOptions& options = {});
NotearsResult notears_learn(const data::EventMatrix& data, const NotearsOptions& options = {});

/// Sample covariance-style second moment of centered (optionally
/// standardized) columns: X^T X / n.
Eigen::MatrixXd notears_moment(const NumericData& data, bool standardize);
NotearsResult notears_from_moment(const Eigen::MatrixXd& moment, const std::vector<std::string>& labels,
                                  const NotearsOptions& options);

// ---------------------------------------------------------------- stability selection

/// `count` log-spaced values from lo to hi inclusive.
std::vector<double> log_grid(double lo, double hi, std::size_t count);

struct StabilityOptions {
    std::vector<double> lambda_grid = log_grid(1e-3, 1.0, 16);
    std::size_t n_resamples = 50;
    double subsample_fraction = 0.8;
    double frequency_threshold = 0.6;
    std::size_t window = 3;
    std::uint64_t seed = 0;
    std::size_t jobs = 1;
    NotearsOptions notears;  // lambda is overridden per grid point
};

struct StabilityReport {
    std::vector<std::string> labels;
    std::vector<double> lambda_grid;
    /// frequencies[k](i, j): fraction of successful resamples at lambda k selecting i -> j.
    std::vector<Eigen::MatrixXd> edge_frequencies;
    std::vector<double> mean_edge_count;
    /// Grid points allowed to support stability (not the densest end, not empty).
    std::vector<bool> eligible;
    std::vector<std::size_t> failed_cells;  // per lambda
    std::vector<bn::Edge> stable_edges;
    /// Stable edges dropped to restore acyclicity.
    std::vector<bn::Edge> dropped_for_cycles;
    bn::Dag dag;

    std::string to_json() const;
};

StabilityReport stability_select(const NumericData& data, const StabilityOptions& options = {});
StabilityReport stability_select(const data::EventMatrix& data, const StabilityOptions& options = {});

// ---------------------------------------------------------------- learner handles

enum class Algorithm { Hc, Pc, Lingam, Notears, NotearsStability };

Algorithm parse_algorithm(const std::string& name);
std::string algorithm_name(Algorithm a);

struct LearnerParams {
    HcOptions hc;
    PcOptions pc;
    LingamOptions lingam;
    NotearsOptions notears;
    StabilityOptions stability;
};

/// Structure learner over a complete matrix; the seed feeds randomized learners.
using Learner = std::function<bn::Dag(const data::EventMatrix&, std::uint64_t seed)>;

Learner make_learner(Algorithm algorithm, LearnerParams params = {});

}  // namespace eventchron::discovery

#endif  // EVENTCHRON_DISCOVERY_HPP
