#ifndef EVENTCHRON_CHRONOLOGY_HPP
#define EVENTCHRON_CHRONOLOGY_HPP

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "eventchron/causal.hpp"
#include "eventchron/dag.hpp"
#include "eventchron/dataset.hpp"
#include "eventchron/stats.hpp"

namespace eventchron::chronology {

/// Forest of strongest causal links. `tree` holds every node of the source
/// graph; `level[i]` is node i's depth in the tree (isolated nodes at 0).
struct ChronologyTree {
    bn::Dag tree;
    std::vector<std::size_t> level;
    /// Nodes with no incident tree edge, in node order.
    std::vector<std::string> isolated;
    /// Events the frequency baseline could not order, merged into one node.
    std::vector<std::vector<std::string>> simultaneity_groups;

    std::map<std::string, std::size_t> level_map() const;
    std::string to_dot(const std::string& name = "chronology") const;
    std::string to_json() const;
};

/// For each outcome, the validated row with the largest value. Ties go to the
/// treatment with the lower level in `g`, then the smaller label.
std::vector<causal::EffectEstimate> strong_causal_relations(const causal::CausalRelationTable& table, const bn::Dag& g);

/// Assembles the strong relations in order of source level and carries over
/// roots and isolated nodes of `g`. Throws if a relation is not an edge of `g`.
ChronologyTree build_chronology(const bn::Dag& g, const std::vector<causal::EffectEstimate>& strong);

struct PairTest {
    std::string a;
    std::string b;
    data::ContingencyTable table;
    double p_value = 1.0;
    double adjusted_p = 1.0;
    bool dependent = false;
};

struct BaselineResult {
    /// Graph over super-nodes; a simultaneity group is labelled "a+b".
    bn::Dag dag;
    std::vector<std::vector<std::string>> groups;  // index-aligned with dag nodes
    std::vector<std::string> isolated;             // events dependent on nothing
    std::vector<PairTest> tests;
    std::vector<std::pair<std::string, std::string>> removed_for_cycles;
    std::vector<std::string> warnings;

    std::string to_json() const;
};

/// Pairwise Fisher tests with multiple-testing correction; dependent pairs
/// are oriented toward the event seen less often alone (A -> B when
/// #(A=1,B=0) > #(A=0,B=1)); equal counts merge the pair into one group.
BaselineResult deterministic_chronology(const data::EventMatrix& m, double alpha = 0.05,
                                        discovery::Correction correction = discovery::Correction::BenjaminiHochberg);

struct ModelScore {
    std::string name;
    double bic = 0.0;
    double log_likelihood = 0.0;
    std::size_t edges = 0;
};

/// BIC and fitted log-likelihood for each model, best BIC first.
std::vector<ModelScore> compare_models(const std::vector<std::pair<std::string, bn::Dag>>& models,
                                       const data::EventMatrix& data, double ess = bn::kDefaultEss);
std::string scores_csv(const std::vector<ModelScore>& scores);

struct FalsifyOptions {
    std::size_t n_permutations = 20;
    double alpha_ci = 0.05;
    double alpha_f = 0.05;
    std::uint64_t seed = 0;
    /// Draw budget, as a multiple of n_permutations, for finding permutations
    /// that change the implied independencies.
    std::size_t max_draw_factor = 50;
};

struct FalsificationVerdict {
    bool falsifiable = false;
    bool falsified = false;
    std::size_t statements = 0;
    std::size_t v_given = 0;
    std::vector<std::size_t> baseline;
    double p_value = 1.0;
    /// Share of drawn permutations whose graph is Markov equivalent to the input.
    double equivalent_fraction = 0.0;
    std::size_t draws = 0;

    std::string to_json() const;
};

/// Counts local Markov statements rejected by the G² test and ranks the
/// count against node-label permutations of the graph that imply a
/// different independence model.
FalsificationVerdict falsify(const bn::Dag& g, const data::EventMatrix& data, const FalsifyOptions& options = {});

struct ConsensusSummary {
    std::map<std::pair<std::string, std::string>, std::size_t> directed;
    /// Keyed by the label pair in ascending order.
    std::map<std::pair<std::string, std::string>, std::size_t> undirected;
    std::vector<std::pair<std::string, std::string>> consensus_directed;
    std::vector<std::pair<std::string, std::string>> consensus_undirected;

    std::string to_json() const;
};

ConsensusSummary consensus_edges(const std::vector<bn::Dag>& dags, std::size_t min_count = 2);

}  // namespace eventchron::chronology

#endif  // EVENTCHRON_CHRONOLOGY_HPP
