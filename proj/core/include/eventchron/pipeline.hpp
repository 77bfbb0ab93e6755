#ifndef EVENTCHRON_PIPELINE_HPP
#define EVENTCHRON_PIPELINE_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "eventchron/bayesnet.hpp"
#include "eventchron/causal.hpp"
#include "eventchron/dataset.hpp"
#include "eventchron/discovery.hpp"
#include "eventchron/error.hpp"
#include "eventchron/imputation.hpp"

namespace eventchron::pipeline {

/// Generating network plus sampling and masking settings.
///
/// Presets: chain, fork, collider, diamond, random-<d>-<p>, and the synthetic
/// stand-ins ndhB (12 editing sites plus an intron, 1899 rows) and ndhD
/// (5 sites, 7752 rows). A network JSON file replaces the preset.
struct ScenarioSpec {
    std::string preset = "chain";
    std::optional<std::string> network_path;
    std::optional<std::size_t> rows;          // preset default when unset
    std::optional<double> missing_rate;       // preset default when unset
    std::uint64_t seed = 0;
};

struct TrueEffect {
    std::string treatment;
    std::string outcome;
    double ace = 0.0;
};

struct Scenario {
    data::EventMatrix complete;
    data::EventMatrix observed;
    bn::DiscreteBayesNet truth;
    std::vector<TrueEffect> effects;  // one per edge of the truth

    /// {spec, network, true_effects}
    std::string sidecar_json(const ScenarioSpec& spec) const;
};

/// Preset networks; `seed` only matters for random-<d>-<p>.
bn::DiscreteBayesNet preset_network(const std::string& name, std::uint64_t seed = 0);
std::size_t preset_rows(const std::string& name);
double preset_missing_rate(const std::string& name);

/// One contiguous block per row: uniform start, geometric length with mean
/// rate * columns, cut at the end of the row.
data::EventMatrix mask_blocks(const data::EventMatrix& complete, double rate, std::uint64_t seed);

Scenario simulate(const ScenarioSpec& spec);

struct PipelineConfig {
    std::optional<std::string> input;
    std::optional<ScenarioSpec> scenario;
    std::optional<std::string> token_schema;
    std::vector<std::string> exclude_events;

    imputation::InitialMethod initial = imputation::InitialMethod::Mode;
    std::string em_learner = "hc";
    std::size_t max_iterations = 10;
    double tolerance = 0.01;
    double ess = bn::kDefaultEss;

    std::vector<std::string> algorithms{"hc", "pc", "lingam", "notears"};
    /// "notears" runs through stability selection when set.
    bool notears_stability = true;
    discovery::LearnerParams learner;

    bool refute = true;
    std::vector<std::pair<std::string, std::string>> references;  // name, edge-list path

    std::size_t falsify_permutations = 20;
    double falsify_alpha_ci = 0.05;
    double falsify_alpha_f = 0.05;

    std::uint64_t seed = 0;
    std::size_t jobs = 1;
    std::string output_dir = "run";

    /// Accepts a config document or a run manifest (its "config" member).
    static PipelineConfig from_json(const std::string& text);
    /// Leaves out jobs and output_dir, which do not change any artifact.
    std::string to_json() const;
    /// Throws ValidationError.
    void validate() const;
};

/// Raised when a pipeline stage fails; earlier artifacts stay on disk.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& what)
        : Error("stage '" + stage + "' failed: " + what), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

discovery::Learner learner_for(const std::string& name, const PipelineConfig& cfg);

/// Runs load, exclusion, imputation, discovery, effects, chronology,
/// comparison and falsification, writing every artifact under
/// cfg.output_dir. Returns the report JSON (also written as report.json).
std::string run_pipeline(const PipelineConfig& cfg);

}  // namespace eventchron::pipeline

#endif  // EVENTCHRON_PIPELINE_HPP
