// eventchron command-line front end.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "eventchron/causal.hpp"
#include "eventchron/chronology.hpp"
#include "eventchron/dataset.hpp"
#include "eventchron/discovery.hpp"
#include "eventchron/error.hpp"
#include "eventchron/graph_io.hpp"
#include "eventchron/imputation.hpp"
#include "eventchron/pipeline.hpp"

namespace ec = eventchron;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitStage = 2;

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ec::ValidationError("cannot read '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// "-" or empty writes to stdout.
void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ec::Error("cannot write '" + path + "'");
    out << text;
}

std::string reads_text(const ec::data::EventMatrix& m, const ec::data::TokenSchema& schema) {
    std::ostringstream out;
    ec::data::write_reads(out, m, schema);
    return out.str();
}

std::string edges_text(const ec::bn::Dag& g) {
    std::ostringstream out;
    ec::bn::write_edge_list(out, g);
    return out.str();
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

struct DataArgs {
    std::string path;
    std::string schema;
    std::string exclude;

    void add(CLI::App* app) {
        app->add_option("--data", path, "Delimited reads table")->required();
        app->add_option("--schema", schema, "Token mapping, e.g. \"1=1,0=0,?=missing\"");
        app->add_option("--exclude", exclude, "Comma-separated events to drop");
    }
    ec::data::TokenSchema token_schema() const {
        return schema.empty() ? ec::data::TokenSchema::defaults() : ec::data::TokenSchema::parse(schema);
    }
    ec::data::EventMatrix load() const {
        return ec::data::exclude_events(ec::data::load_reads(path, token_schema()), split_list(exclude));
    }
};

std::vector<double> parse_grid(const std::string& spec) {
    const auto parts = [&] {
        std::vector<std::string> out;
        std::string item;
        std::istringstream in(spec);
        while (std::getline(in, item, ':')) out.push_back(item);
        return out;
    }();
    if (parts.size() != 3) throw ec::ValidationError("lambda grid must look like lo:hi:count");
    try {
        return ec::discovery::log_grid(std::stod(parts[0]), std::stod(parts[1]), std::stoul(parts[2]));
    } catch (const std::invalid_argument&) {
        throw ec::ValidationError("lambda grid must look like lo:hi:count");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Causal chronologies of binary events from incomplete read matrices"};
    app.require_subcommand(1);
    std::function<void()> action;

    // simulate
    auto* sim = app.add_subcommand("simulate", "Sample a synthetic scenario with block missingness");
    ec::pipeline::ScenarioSpec sim_spec;
    std::size_t sim_rows = 0;
    double sim_rate = -1.0;
    std::string sim_network, sim_out, sim_sidecar, sim_complete;
    sim->add_option("--preset", sim_spec.preset, "chain|fork|collider|diamond|random-<d>-<p>|ndhB|ndhD")
        ->capture_default_str();
    sim->add_option("--network", sim_network, "Network JSON replacing the preset");
    sim->add_option("--rows", sim_rows, "Row count (preset default when omitted)");
    sim->add_option("--missing-rate", sim_rate, "Mean block length as a fraction of the columns, in [0, 1)");
    sim->add_option("--seed", sim_spec.seed)->capture_default_str();
    sim->add_option("--out", sim_out, "Observed matrix (default stdout)");
    sim->add_option("--complete-out", sim_complete, "Matrix before masking");
    sim->add_option("--sidecar", sim_sidecar, "Ground truth JSON (network and true effects)");
    sim->callback([&] {
        action = [&] {
            if (!sim_network.empty()) sim_spec.network_path = sim_network;
            if (sim_rows > 0) sim_spec.rows = sim_rows;
            if (sim_rate >= 0.0) sim_spec.missing_rate = sim_rate;
            const auto s = ec::pipeline::simulate(sim_spec);
            emit(sim_out, reads_text(s.observed, {}));
            if (!sim_complete.empty()) emit(sim_complete, reads_text(s.complete, {}));
            if (!sim_sidecar.empty()) emit(sim_sidecar, s.sidecar_json(sim_spec));
        };
    });

    // missingness
    auto* prof = app.add_subcommand("missingness", "Missingness report of a reads table");
    DataArgs prof_data;
    prof_data.add(prof);
    prof->callback([&] {
        action = [&] { emit("-", ec::data::missingness_profile(prof_data.load()).to_json() + "\n"); };
    });

    // impute
    auto* imp = app.add_subcommand("impute", "Initial imputation followed by EM with a structure learner");
    DataArgs imp_data;
    imp_data.add(imp);
    std::string imp_method = "mode", imp_learner = "hc", imp_out, imp_report;
    ec::imputation::EmOptions imp_opts;
    imp->add_option("--method", imp_method, "mode|round_robin")->capture_default_str();
    imp->add_option("--learner", imp_learner, "hc|pc|lingam|notears|notears-stability")->capture_default_str();
    imp->add_option("--tol", imp_opts.tolerance)->capture_default_str();
    imp->add_option("--max-iter", imp_opts.max_iterations)->capture_default_str();
    imp->add_option("--ess", imp_opts.ess)->capture_default_str();
    imp->add_option("--seed", imp_opts.seed)->capture_default_str();
    imp->add_option("--out", imp_out, "Completed matrix (default stdout)");
    imp->add_option("--report", imp_report, "Convergence report JSON");
    imp->callback([&] {
        action = [&] {
            imp_opts.initial = ec::imputation::parse_initial_method(imp_method);
            ec::pipeline::PipelineConfig cfg;
            const auto m = imp_data.load();
            const auto r = ec::imputation::em_impute(m, ec::pipeline::learner_for(imp_learner, cfg), imp_opts);
            emit(imp_out, reads_text(r.completed, imp_data.token_schema()));
            emit(imp_report.empty() ? std::string("-") : imp_report, r.report_json() + "\n");
        };
    });

    // discover
    auto* disc = app.add_subcommand("discover", "Learn a DAG from a complete matrix");
    DataArgs disc_data;
    disc_data.add(disc);
    std::string disc_algo = "hc", disc_grid, disc_prefix;
    ec::discovery::LearnerParams disc_params;
    std::size_t disc_resamples = disc_params.stability.n_resamples;
    std::uint64_t disc_seed = 0;
    std::size_t disc_jobs = 1;
    disc->add_option("--algo", disc_algo, "hc|pc|lingam|notears|notears-stability")->capture_default_str();
    disc->add_option("--alpha", disc_params.pc.alpha, "PC significance level")->capture_default_str();
    disc->add_option("--lambda", disc_params.notears.lambda, "NOTEARS l1 weight")->capture_default_str();
    disc->add_option("--lambda-grid", disc_grid, "Stability grid lo:hi:count (log-spaced)");
    disc->add_option("--omega", disc_params.notears.omega, "NOTEARS edge threshold")->capture_default_str();
    disc->add_flag("--standardize", disc_params.notears.standardize, "Standardize columns for NOTEARS");
    disc->add_option("--resamples", disc_resamples, "Stability resamples")->capture_default_str();
    disc->add_option("--seed", disc_seed)->capture_default_str();
    disc->add_option("--jobs", disc_jobs, "Worker threads for stability selection")->capture_default_str();
    disc->add_option("--out-prefix", disc_prefix, "Writes PREFIX.edges, PREFIX.dot (and PREFIX.stability.json)");
    disc->callback([&] {
        action = [&] {
            const auto m = disc_data.load();
            if (!m.is_complete()) throw ec::ValidationError("discover needs a complete matrix; run impute first");
            const auto algo = ec::discovery::parse_algorithm(disc_algo);
            ec::bn::DotOptions dot;
            dot.graph_name = disc_algo;
            ec::bn::Dag g;
            std::string stability_json;
            if (algo == ec::discovery::Algorithm::Pc) {
                const auto r = ec::discovery::pc_learn_detailed(m, disc_params.pc);
                for (const auto& e : r.order_forced) dot.dashed.emplace_back(r.dag.label(e.from), r.dag.label(e.to));
                g = r.dag;
            } else if (algo == ec::discovery::Algorithm::NotearsStability) {
                auto opts = disc_params.stability;
                if (!disc_grid.empty()) opts.lambda_grid = parse_grid(disc_grid);
                opts.n_resamples = disc_resamples;
                opts.notears = disc_params.notears;
                opts.seed = disc_seed;
                opts.jobs = disc_jobs;
                const auto r = ec::discovery::stability_select(m, opts);
                stability_json = r.to_json();
                g = r.dag;
            } else {
                g = ec::discovery::make_learner(algo, disc_params)(m, disc_seed);
            }
            if (disc_prefix.empty()) {
                emit("-", edges_text(g));
                return;
            }
            emit(disc_prefix + ".edges", edges_text(g));
            emit(disc_prefix + ".dot", ec::bn::to_dot(g, dot));
            if (!stability_json.empty()) emit(disc_prefix + ".stability.json", stability_json + "\n");
        };
    });

    // effects
    auto* eff = app.add_subcommand("effects", "ACE/NDE per edge with refutations");
    DataArgs eff_data;
    eff_data.add(eff);
    std::string eff_dag, eff_refute = "all", eff_out, eff_json;
    ec::causal::EffectsOptions eff_opts;
    double eff_ess = ec::bn::kDefaultEss;
    eff->add_option("--dag", eff_dag, "Edge-list DAG")->required();
    eff->add_option("--refute", eff_refute, "all|none")->capture_default_str();
    eff->add_option("--seed", eff_opts.seed)->capture_default_str();
    eff->add_option("--ess", eff_ess)->capture_default_str();
    eff->add_option("--out", eff_out, "Relation table CSV (default stdout)");
    eff->add_option("--json", eff_json, "Relation table JSON");
    eff->callback([&] {
        action = [&] {
            if (eff_refute != "all" && eff_refute != "none") throw ec::ValidationError("--refute must be all or none");
            eff_opts.refute = eff_refute == "all";
            eff_opts.refutation.ess = eff_ess;
            const auto m = eff_data.load();
            const auto g = ec::bn::load_edge_list(eff_dag);
            const auto net = ec::bn::fit_cpts(g, m, eff_ess);
            const auto t = ec::causal::effects_for_dag(net, m, eff_opts);
            emit(eff_out, t.to_csv());
            if (!eff_json.empty()) emit(eff_json, t.to_json() + "\n");
        };
    });

    // chronology
    auto* chr = app.add_subcommand("chronology", "Build the chronology tree from a relation table");
    std::string chr_rel, chr_dag, chr_prefix;
    chr->add_option("--relations", chr_rel, "Relation table CSV")->required();
    chr->add_option("--dag", chr_dag, "Edge-list DAG the relations came from")->required();
    chr->add_option("--out-prefix", chr_prefix, "Writes PREFIX.edges, PREFIX.dot, PREFIX.json");
    chr->callback([&] {
        action = [&] {
            const auto g = ec::bn::load_edge_list(chr_dag);
            const auto table = ec::causal::CausalRelationTable::from_csv(slurp(chr_rel));
            const auto t = ec::chronology::build_chronology(g, ec::chronology::strong_causal_relations(table, g));
            if (chr_prefix.empty()) {
                emit("-", edges_text(t.tree));
                return;
            }
            emit(chr_prefix + ".edges", edges_text(t.tree));
            emit(chr_prefix + ".dot", t.to_dot());
            emit(chr_prefix + ".json", t.to_json() + "\n");
        };
    });

    // baseline
    auto* base = app.add_subcommand("baseline", "Frequency-based chronology from pairwise Fisher tests");
    DataArgs base_data;
    base_data.add(base);
    double base_alpha = 0.05;
    std::string base_corr = "bh", base_prefix;
    base->add_option("--alpha", base_alpha)->capture_default_str();
    base->add_option("--correction", base_corr, "bh|bonferroni")->capture_default_str();
    base->add_option("--out-prefix", base_prefix, "Writes PREFIX.json, PREFIX.dot, PREFIX.edges");
    base->callback([&] {
        action = [&] {
            ec::discovery::Correction corr;
            if (base_corr == "bh") {
                corr = ec::discovery::Correction::BenjaminiHochberg;
            } else if (base_corr == "bonferroni") {
                corr = ec::discovery::Correction::Bonferroni;
            } else {
                throw ec::ValidationError("--correction must be bh or bonferroni");
            }
            const auto r = ec::chronology::deterministic_chronology(base_data.load(), base_alpha, corr);
            for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
            if (base_prefix.empty()) {
                emit("-", r.to_json() + "\n");
                return;
            }
            emit(base_prefix + ".json", r.to_json() + "\n");
            ec::bn::DotOptions dot;
            dot.graph_name = "baseline";
            const auto levels = ec::bn::topological_levels(r.dag);
            for (std::size_t i = 0; i < r.dag.size(); ++i) dot.ranks[r.dag.label(i)] = levels[i];
            emit(base_prefix + ".dot", ec::bn::to_dot(r.dag, dot));
            emit(base_prefix + ".edges", edges_text(r.dag));
        };
    });

    // compare
    auto* cmp = app.add_subcommand("compare", "BIC and log-likelihood of competing DAGs");
    DataArgs cmp_data;
    cmp_data.add(cmp);
    std::vector<std::string> cmp_models;
    std::string cmp_out;
    double cmp_ess = ec::bn::kDefaultEss;
    cmp->add_option("--model", cmp_models, "name=dagfile (repeatable)")->required();
    cmp->add_option("--ess", cmp_ess)->capture_default_str();
    cmp->add_option("--out", cmp_out, "Score CSV (default stdout)");
    cmp->callback([&] {
        action = [&] {
            std::vector<std::pair<std::string, ec::bn::Dag>> models;
            for (const auto& spec : cmp_models) {
                const auto eq = spec.find('=');
                if (eq == std::string::npos || eq == 0) throw ec::ValidationError("--model expects name=dagfile");
                models.emplace_back(spec.substr(0, eq), ec::bn::load_edge_list(spec.substr(eq + 1)));
            }
            emit(cmp_out, ec::chronology::scores_csv(ec::chronology::compare_models(models, cmp_data.load(), cmp_ess)));
        };
    });

    // falsify
    auto* fal = app.add_subcommand("falsify", "Permutation test of a DAG's implied independencies");
    DataArgs fal_data;
    fal_data.add(fal);
    std::string fal_dag, fal_out;
    ec::chronology::FalsifyOptions fal_opts;
    fal->add_option("--dag", fal_dag, "Edge-list DAG")->required();
    fal->add_option("--perms", fal_opts.n_permutations)->capture_default_str();
    fal->add_option("--alpha-ci", fal_opts.alpha_ci)->capture_default_str();
    fal->add_option("--alpha-f", fal_opts.alpha_f)->capture_default_str();
    fal->add_option("--seed", fal_opts.seed)->capture_default_str();
    fal->add_option("--out", fal_out, "Verdict JSON (default stdout)");
    fal->callback([&] {
        action = [&] {
            const auto v = ec::chronology::falsify(ec::bn::load_edge_list(fal_dag), fal_data.load(), fal_opts);
            emit(fal_out, v.to_json() + "\n");
        };
    });

    // pipeline
    auto* pipe = app.add_subcommand("pipeline", "End-to-end run writing every artifact to one directory");
    std::string pipe_config, pipe_input, pipe_preset, pipe_out_dir, pipe_algos;
    std::optional<std::uint64_t> pipe_seed;
    std::optional<std::size_t> pipe_rows, pipe_jobs;
    std::optional<double> pipe_rate;
    pipe->add_option("--config", pipe_config, "JSON config or a previous run's manifest.json");
    pipe->add_option("--input", pipe_input, "Reads table (replaces the config's source)");
    pipe->add_option("--preset", pipe_preset, "Synthetic scenario preset (replaces the config's source)");
    pipe->add_option("--rows", pipe_rows, "Scenario rows");
    pipe->add_option("--missing-rate", pipe_rate, "Scenario missing rate");
    pipe->add_option("--algos", pipe_algos, "Comma-separated learners");
    pipe->add_option("--seed", pipe_seed, "Master seed");
    pipe->add_option("--jobs", pipe_jobs, "Worker cap");
    pipe->add_option("--out-dir", pipe_out_dir, "Run directory");
    pipe->callback([&] {
        action = [&] {
            auto cfg = pipe_config.empty() ? ec::pipeline::PipelineConfig{}
                                           : ec::pipeline::PipelineConfig::from_json(slurp(pipe_config));
            if (!pipe_input.empty()) {
                cfg.input = pipe_input;
                cfg.scenario.reset();
            }
            if (!pipe_preset.empty()) {
                cfg.scenario = cfg.scenario.value_or(ec::pipeline::ScenarioSpec{});
                cfg.scenario->preset = pipe_preset;
                cfg.input.reset();
            }
            if (pipe_rows || pipe_rate) {
                if (!cfg.scenario) throw ec::ValidationError("--rows and --missing-rate need a scenario source");
                if (pipe_rows) cfg.scenario->rows = *pipe_rows;
                if (pipe_rate) cfg.scenario->missing_rate = *pipe_rate;
            }
            if (!pipe_algos.empty()) cfg.algorithms = split_list(pipe_algos);
            if (pipe_seed) {
                cfg.seed = *pipe_seed;
                if (cfg.scenario) cfg.scenario->seed = *pipe_seed;
            }
            if (pipe_jobs) cfg.jobs = *pipe_jobs;
            if (!pipe_out_dir.empty()) cfg.output_dir = pipe_out_dir;
            ec::pipeline::run_pipeline(cfg);
            std::cerr << "wrote " << cfg.output_dir << "/report.json\n";
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }
    try {
        if (action) action();
    } catch (const ec::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitStage;
    }
    return 0;
}
