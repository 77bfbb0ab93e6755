#ifndef EVENTCHRON_CAUSAL_HPP
#define EVENTCHRON_CAUSAL_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "eventchron/bayesnet.hpp"
#include "eventchron/dag.hpp"
#include "eventchron/dataset.hpp"

namespace eventchron::causal {

enum class EstimandKind { Ace, Nde };
enum class RefutationKind { Placebo, Subset, RandomCommonCause };

std::string estimand_name(EstimandKind k);
EstimandKind parse_estimand(const std::string& name);
std::string refutation_name(RefutationKind k);
RefutationKind parse_refutation(const std::string& name);

struct RefutationResult {
    RefutationKind kind = RefutationKind::Placebo;
    double refuted_value = 0.0;
    bool passed = false;
    double tolerance = 0.0;
};

struct EffectEstimate {
    std::string treatment;
    std::string outcome;
    EstimandKind kind = EstimandKind::Ace;
    double value = 0.0;
    std::vector<std::string> adjustment_set;
    std::vector<std::string> mediators;
    /// ACE of the same pair; for NDE rows total_effect - value is the indirect part.
    double total_effect = 0.0;
    std::vector<RefutationResult> refutations;
    bool validated = false;
    /// Set when this edge could not be estimated.
    std::string error;

    std::optional<bool> refutation_passed(RefutationKind k) const;
};

/// Parents of x, checked against the backdoor criterion: none is a
/// descendant of x and they separate x from y once x's outgoing edges are
/// cut. Throws if the check fails or y is a parent of x.
std::vector<std::string> backdoor_set(const bn::Dag& g, const std::string& x, const std::string& y);

/// Nodes on some directed path x -> ... -> y, endpoints excluded, in node order.
std::vector<std::string> mediators(const bn::Dag& g, const std::string& x, const std::string& y);

/// Backdoor-adjusted P(y=1 | do(x=1)) - P(y=1 | do(x=0)) by exact inference.
EffectEstimate ace(const bn::DiscreteBayesNet& bn, const std::string& x, const std::string& y);

/// Same quantity by graph surgery: P(y=1) in the networks with x clamped.
double ace_surgery(const bn::DiscreteBayesNet& bn, const std::string& x, const std::string& y);

/// Mediation formula with baseline x = 0 over the given mediator set and the
/// parents of x. With no mediators it reduces to the ACE.
double mediation_formula(const bn::DiscreteBayesNet& bn, std::size_t x, std::size_t y,
                         const std::vector<std::size_t>& mediator_nodes);

/// Natural direct effect; throws when x and y have no mediator.
EffectEstimate nde(const bn::DiscreteBayesNet& bn, const std::string& x, const std::string& y);

struct RefutationOptions {
    double ess = bn::kDefaultEss;
    double placebo_tolerance = 0.05;
    std::size_t subset_count = 20;
    double subset_fraction = 0.8;
    double subset_relative_tolerance = 0.1;
    double subset_absolute_tolerance = 0.02;
    double common_cause_tolerance = 0.05;
};

/// Re-estimates `estimate` on perturbed data with the network's DAG refitted.
RefutationResult refute(const bn::DiscreteBayesNet& bn, const data::EventMatrix& data, const EffectEstimate& estimate,
                        RefutationKind kind, std::uint64_t seed, const RefutationOptions& options = {});

struct CausalRelationTable {
    std::vector<EffectEstimate> rows;

    std::string to_csv() const;
    std::string to_json() const;
    /// Reads the CSV written by to_csv (refutation columns optional).
    static CausalRelationTable from_csv(const std::string& text);
};

struct EffectsOptions {
    bool refute = true;
    std::uint64_t seed = 0;
    RefutationOptions refutation;
};

/// One row per edge: NDE when the edge has mediators, ACE otherwise. Rows
/// with a strictly positive value are validated. Sorted by value, largest first.
CausalRelationTable effects_for_dag(const bn::DiscreteBayesNet& bn, const data::EventMatrix& data,
                                    const EffectsOptions& options = {});

}  // namespace eventchron::causal

#endif  // EVENTCHRON_CAUSAL_HPP
