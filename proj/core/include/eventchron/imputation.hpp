#ifndef EVENTCHRON_IMPUTATION_HPP
#define EVENTCHRON_IMPUTATION_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "eventchron/bayesnet.hpp"
#include "eventchron/dag.hpp"
#include "eventchron/dataset.hpp"
#include "eventchron/discovery.hpp"

namespace eventchron::imputation {

enum class InitialMethod { Mode, RoundRobin };

InitialMethod parse_initial_method(const std::string& name);
std::string initial_method_name(InitialMethod m);

struct RoundRobinOptions {
    std::size_t neighbours = 25;
    std::size_t sweeps = 3;
};

/// Majority value of the observed cells of column `c`; ties give 0.
bool column_mode(const data::EventMatrix& m, std::size_t c);

/// Fills every missing cell. Mode uses each column's majority; round robin
/// predicts each cell from the k nearest rows (Hamming distance over the
/// columns that are complete at that point) that observe the column.
/// Throws when a column has no observed cell.
data::EventMatrix initial_impute(const data::EventMatrix& m, InitialMethod method = InitialMethod::Mode,
                                 const RoundRobinOptions& options = {});

/// |E1 sym-diff E2| / max(|E1 union E2|, 1) over directed edges.
double edge_change_fraction(const bn::Dag& a, const bn::Dag& b);

struct EmOptions {
    InitialMethod initial = InitialMethod::Mode;
    std::size_t max_iterations = 10;
    double tolerance = 0.01;
    double ess = bn::kDefaultEss;
    std::uint64_t seed = 0;
};

struct ImputationResult {
    data::EventMatrix completed;
    bn::DiscreteBayesNet model;
    std::size_t iterations = 0;
    std::vector<double> edge_change_history;
    bool converged = false;

    std::string report_json() const;
};

/// Alternates structure learning plus CPT fitting with a batch E-step that
/// sets each originally missing cell to its most probable value given the
/// current values of its parents. Observed cells are never modified.
ImputationResult em_impute(const data::EventMatrix& m, const discovery::Learner& learner,
                           const EmOptions& options = {});

}  // namespace eventchron::imputation

#endif  // EVENTCHRON_IMPUTATION_HPP
