#ifndef EVENTCHRON_BAYESNET_HPP
#define EVENTCHRON_BAYESNET_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "eventchron/dag.hpp"
#include "eventchron/dataset.hpp"

namespace eventchron::bn {

/// P(node = 1 | parents) for every parent assignment.
///
/// Assignments are enumerated in binary counting order of `parents`:
/// parents.front() is the most significant bit.
struct Cpt {
    std::size_t node = 0;
    std::vector<std::size_t> parents;
    std::vector<double> p1;

    std::size_t assignments() const { return std::size_t{1} << parents.size(); }
    /// `values` is indexed by node id.
    template <typename Values>
    std::size_t assignment_index(const Values& values) const {
        std::size_t idx = 0;
        for (auto p : parents) idx = (idx << 1) | static_cast<std::size_t>(values[p] != 0);
        return idx;
    }
    double prob(bool value, std::size_t assignment) const {
        return value ? p1[assignment] : 1.0 - p1[assignment];
    }
};

/// A Dag plus one Cpt per node.
class DiscreteBayesNet {
public:
    DiscreteBayesNet(Dag dag, std::vector<Cpt> cpts);

    const Dag& dag() const { return dag_; }
    const Cpt& cpt(std::size_t node) const { return cpts_.at(node); }
    const std::vector<Cpt>& cpts() const { return cpts_; }
    std::size_t size() const { return dag_.size(); }

    /// `values[i]` is the state of node i.
    double joint(std::span<const std::uint8_t> values) const;

    /// The do(node = value) network: node's CPT becomes a point mass with no parents.
    DiscreteBayesNet intervened(std::size_t node, bool value) const;

private:
    Dag dag_;
    std::vector<Cpt> cpts_;
};

inline constexpr double kDefaultEss = 1.0;
inline constexpr double kDefaultProbabilityFloor = 1e-9;

/// Column-major 0/1 view of a complete matrix, ordered like the Dag's nodes.
struct BinaryData {
    std::size_t n_rows = 0;
    std::vector<std::vector<std::uint8_t>> columns;

    /// Picks `labels` out of `m` by name. Throws when a label is absent or a
    /// selected column has missing cells.
    static BinaryData from(const data::EventMatrix& m, const std::vector<std::string>& labels);
    static BinaryData from(const data::EventMatrix& m) { return from(m, m.columns()); }
};

/// Counts indexed [assignment][value] for a node given an ordered parent list.
std::vector<std::array<std::size_t, 2>> family_counts(const BinaryData& d, std::size_t node,
                                                      std::span<const std::size_t> parents);

/// Bayesian estimate with a symmetric Dirichlet prior of total mass `ess`
/// per parent assignment: (n1 + ess/2) / (n + ess). ess = 0 gives the ML
/// estimate (0.5 for unseen assignments).
DiscreteBayesNet fit_cpts(const Dag& g, const data::EventMatrix& data, double ess = kDefaultEss);
DiscreteBayesNet fit_cpts(const Dag& g, const BinaryData& data, double ess = kDefaultEss);

/// Sum over rows and nodes of ln P(value | parents); zero probabilities are
/// floored at `floor`.
double log_likelihood(const DiscreteBayesNet& bn, const data::EventMatrix& data,
                      double floor = kDefaultProbabilityFloor);

/// Local BIC of one family: maximum-likelihood log-likelihood minus
/// (2^|parents| / 2) ln N.
double bic_local_score(const BinaryData& d, std::size_t node, std::span<const std::size_t> parents);

/// Decomposable BIC, higher is better.
double bic_score(const Dag& g, const data::EventMatrix& data);
double bic_score(const Dag& g, const BinaryData& data);

/// (node, state) pairs.
using Evidence = std::vector<std::pair<std::size_t, bool>>;

enum class InferenceMethod { Auto, Enumeration, VariableElimination };

/// Networks up to this size are queried by full joint enumeration.
inline constexpr std::size_t kEnumerationLimit = 20;

/// P(target = 1 | evidence). Throws ZeroProbabilityEvidence when P(evidence) = 0.
double query(const DiscreteBayesNet& bn, std::size_t target, const Evidence& evidence = {},
             InferenceMethod method = InferenceMethod::Auto);

/// Joint distribution over `vars` (bit k of the index is vars[k]).
std::vector<double> marginal(const DiscreteBayesNet& bn, const std::vector<std::size_t>& vars,
                             InferenceMethod method = InferenceMethod::Auto);

/// Ancestral sampling; identical output for identical seeds.
data::EventMatrix sample(const DiscreteBayesNet& bn, std::size_t n, std::uint64_t seed);

}  // namespace eventchron::bn

#endif  // EVENTCHRON_BAYESNET_HPP
