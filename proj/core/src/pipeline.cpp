#include "eventchron/pipeline.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "eventchron/chronology.hpp"
#include "eventchron/graph_io.hpp"
#include "eventchron/rng.hpp"

namespace eventchron::pipeline {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

template <typename T>
void read_opt(const json& j, const char* key, T& target) {
    if (j.contains(key) && !j.at(key).is_null()) target = j.at(key).get<T>();
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string safe_name(const std::string& s) {
    std::string out;
    for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.') ? c : '_';
    return out;
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config is not valid JSON: ") + e.what());
    }
    if (doc.contains("config") && doc.at("config").is_object()) doc = doc.at("config");
    if (!doc.is_object()) throw ValidationError("config must be a JSON object");

    PipelineConfig cfg;
    try {
        if (doc.contains("input") && !doc["input"].is_null()) cfg.input = doc["input"].get<std::string>();
        if (doc.contains("scenario") && !doc["scenario"].is_null()) {
            const auto& s = doc["scenario"];
            ScenarioSpec spec;
            read_opt(s, "preset", spec.preset);
            if (s.contains("network") && !s["network"].is_null()) spec.network_path = s["network"].get<std::string>();
            if (s.contains("rows") && !s["rows"].is_null()) spec.rows = s["rows"].get<std::size_t>();
            if (s.contains("missing_rate") && !s["missing_rate"].is_null()) spec.missing_rate = s["missing_rate"].get<double>();
            read_opt(s, "seed", spec.seed);
            cfg.scenario = spec;
        }
        if (doc.contains("token_schema") && !doc["token_schema"].is_null())
            cfg.token_schema = doc["token_schema"].get<std::string>();
        read_opt(doc, "exclude_events", cfg.exclude_events);

        if (doc.contains("imputation")) {
            const auto& im = doc["imputation"];
            if (im.contains("method")) cfg.initial = imputation::parse_initial_method(im["method"].get<std::string>());
            read_opt(im, "learner", cfg.em_learner);
            read_opt(im, "max_iter", cfg.max_iterations);
            read_opt(im, "tol", cfg.tolerance);
            read_opt(im, "ess", cfg.ess);
        }
        if (doc.contains("discovery")) {
            const auto& d = doc["discovery"];
            read_opt(d, "algorithms", cfg.algorithms);
            read_opt(d, "notears_stability", cfg.notears_stability);
            read_opt(d, "alpha", cfg.learner.pc.alpha);
            if (d.contains("max_indegree") && !d["max_indegree"].is_null())
                cfg.learner.hc.max_indegree = d["max_indegree"].get<std::size_t>();
            read_opt(d, "lingam_threshold", cfg.learner.lingam.coefficient_threshold);
            read_opt(d, "lambda", cfg.learner.notears.lambda);
            read_opt(d, "omega", cfg.learner.notears.omega);
            read_opt(d, "standardize", cfg.learner.notears.standardize);
            read_opt(d, "lambda_grid", cfg.learner.stability.lambda_grid);
            read_opt(d, "resamples", cfg.learner.stability.n_resamples);
            read_opt(d, "subsample_fraction", cfg.learner.stability.subsample_fraction);
            read_opt(d, "frequency_threshold", cfg.learner.stability.frequency_threshold);
            read_opt(d, "window", cfg.learner.stability.window);
        }
        if (doc.contains("effects")) read_opt(doc["effects"], "refute", cfg.refute);
        if (doc.contains("references")) {
            for (const auto& [name, path] : doc["references"].items()) cfg.references.emplace_back(name, path.get<std::string>());
        }
        if (doc.contains("falsify")) {
            const auto& f = doc["falsify"];
            read_opt(f, "perms", cfg.falsify_permutations);
            read_opt(f, "alpha_ci", cfg.falsify_alpha_ci);
            read_opt(f, "alpha_f", cfg.falsify_alpha_f);
        }
        read_opt(doc, "seed", cfg.seed);
        read_opt(doc, "jobs", cfg.jobs);
        read_opt(doc, "output_dir", cfg.output_dir);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("bad config value: ") + e.what());
    }
    return cfg;
}

std::string PipelineConfig::to_json() const {
    json j;
    j["input"] = input ? json(*input) : json(nullptr);
    if (scenario) {
        json s;
        s["preset"] = scenario->preset;
        s["network"] = scenario->network_path ? json(*scenario->network_path) : json(nullptr);
        s["rows"] = scenario->rows ? json(*scenario->rows) : json(nullptr);
        s["missing_rate"] = scenario->missing_rate ? json(*scenario->missing_rate) : json(nullptr);
        s["seed"] = scenario->seed;
        j["scenario"] = s;
    } else {
        j["scenario"] = nullptr;
    }
    j["token_schema"] = token_schema ? json(*token_schema) : json(nullptr);
    j["exclude_events"] = exclude_events;
    j["imputation"] = {{"method", imputation::initial_method_name(initial)},
                       {"learner", em_learner},
                       {"max_iter", max_iterations},
                       {"tol", tolerance},
                       {"ess", ess}};
    json d;
    d["algorithms"] = algorithms;
    d["notears_stability"] = notears_stability;
    d["alpha"] = learner.pc.alpha;
    d["max_indegree"] = learner.hc.max_indegree ? json(*learner.hc.max_indegree) : json(nullptr);
    d["lingam_threshold"] = learner.lingam.coefficient_threshold;
    d["lambda"] = learner.notears.lambda;
    d["omega"] = learner.notears.omega;
    d["standardize"] = learner.notears.standardize;
    d["lambda_grid"] = learner.stability.lambda_grid;
    d["resamples"] = learner.stability.n_resamples;
    d["subsample_fraction"] = learner.stability.subsample_fraction;
    d["frequency_threshold"] = learner.stability.frequency_threshold;
    d["window"] = learner.stability.window;
    j["discovery"] = d;
    j["effects"] = {{"refute", refute}};
    json refs = json::object();
    for (const auto& [name, path] : references) refs[name] = path;
    j["references"] = refs;
    j["falsify"] = {{"perms", falsify_permutations}, {"alpha_ci", falsify_alpha_ci}, {"alpha_f", falsify_alpha_f}};
    j["seed"] = seed;
    return j.dump(2);
}

void PipelineConfig::validate() const {
    if (input.has_value() == scenario.has_value()) throw ValidationError("exactly one of input and scenario must be given");
    if (input && !fs::exists(*input)) throw ValidationError("input file '" + *input + "' does not exist");
    if (scenario && scenario->network_path && !fs::exists(*scenario->network_path))
        throw ValidationError("network file '" + *scenario->network_path + "' does not exist");
    if (scenario && scenario->missing_rate && !(*scenario->missing_rate >= 0.0 && *scenario->missing_rate < 1.0))
        throw ValidationError("missing rate must lie in [0, 1)");
    if (algorithms.empty()) throw ValidationError("no discovery algorithm requested");
    std::set<std::string> seen;
    for (const auto& a : algorithms) {
        discovery::parse_algorithm(a);
        if (!seen.insert(a).second) throw ValidationError("algorithm '" + a + "' listed twice");
    }
    discovery::parse_algorithm(em_learner);
    if (max_iterations == 0) throw ValidationError("max_iter must be positive");
    if (!(tolerance >= 0.0 && tolerance <= 1.0)) throw ValidationError("tol must lie in [0, 1]");
    if (!(ess >= 0.0)) throw ValidationError("ess must be non-negative");
    for (const auto& [name, path] : references) {
        if (name.empty()) throw ValidationError("reference model needs a name");
        if (!fs::exists(path)) throw ValidationError("reference DAG '" + path + "' does not exist");
    }
    if (output_dir.empty()) throw ValidationError("output_dir is empty");
    if (token_schema) data::TokenSchema::parse(*token_schema).validate();
}

discovery::Learner learner_for(const std::string& name, const PipelineConfig& cfg) {
    auto algo = discovery::parse_algorithm(name);
    if (algo == discovery::Algorithm::Notears && cfg.notears_stability) algo = discovery::Algorithm::NotearsStability;
    auto params = cfg.learner;
    params.stability.notears = cfg.learner.notears;
    params.stability.jobs = cfg.jobs;
    return discovery::make_learner(algo, params);
}

namespace {

class RunWriter {
public:
    explicit RunWriter(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

    void write(const std::string& name, const std::string& content) {
        std::ofstream out(dir_ / name, std::ios::binary);
        if (!out) throw Error("cannot write '" + (dir_ / name).string() + "'");
        out << content;
        artifacts_.emplace_back(name, fnv1a(content));
    }
    const std::vector<std::pair<std::string, std::uint64_t>>& artifacts() const { return artifacts_; }

private:
    fs::path dir_;
    std::vector<std::pair<std::string, std::uint64_t>> artifacts_;
};

template <typename Fn>
auto stage(const std::string& name, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

std::string reads_csv(const data::EventMatrix& m, const data::TokenSchema& schema) {
    std::ostringstream out;
    data::write_reads(out, m, schema);
    return out.str();
}

std::string edge_list(const bn::Dag& g) {
    std::ostringstream out;
    bn::write_edge_list(out, g);
    return out.str();
}

json edges_json(const bn::Dag& g) {
    json a = json::array();
    for (const auto& [p, c] : g.labeled_edges()) a.push_back({p, c});
    return a;
}

}  // namespace

std::string run_pipeline(const PipelineConfig& cfg) {
    cfg.validate();
    const auto schema = cfg.token_schema ? data::TokenSchema::parse(*cfg.token_schema) : data::TokenSchema::defaults();
    const std::string config_text = cfg.to_json();
    const auto config_hash = fnv1a(config_text);
    RunWriter out(cfg.output_dir);
    json report;
    report["config_hash"] = hex64(config_hash);
    report["seed"] = cfg.seed;

    // load
    data::EventMatrix raw = stage("load", [&] {
        if (cfg.input) return data::load_reads(*cfg.input, schema);
        const auto scenario = simulate(*cfg.scenario);
        out.write("scenario.json", scenario.sidecar_json(*cfg.scenario));
        out.write("data.observed.csv", reads_csv(scenario.observed, schema));
        return scenario.observed;
    });
    const auto working = stage("exclude", [&] { return data::exclude_events(raw, cfg.exclude_events); });
    report["rows"] = working.rows();
    report["columns"] = working.columns();
    report["missingness"] = json::parse(data::missingness_profile(working).to_json());

    // impute
    const auto imputed = stage("impute", [&] {
        imputation::EmOptions opts;
        opts.initial = cfg.initial;
        opts.max_iterations = cfg.max_iterations;
        opts.tolerance = cfg.tolerance;
        opts.ess = cfg.ess;
        opts.seed = derive_seed(cfg.seed, "impute");
        auto result = imputation::em_impute(working, learner_for(cfg.em_learner, cfg), opts);
        out.write("data.imputed.csv", reads_csv(result.completed, schema));
        out.write("imputation.json", result.report_json());
        report["imputation"] = json::parse(result.report_json());
        report["imputation"]["learner"] = cfg.em_learner;
        return result.completed;
    });

    std::vector<std::pair<std::string, bn::Dag>> models;
    std::vector<bn::Dag> trees;
    json per_algo = json::object();
    for (const auto& algo : cfg.algorithms) {
        const auto seed = derive_seed(cfg.seed, "discover-" + algo);
        const auto kind = discovery::parse_algorithm(algo);
        bn::DotOptions dot;
        dot.graph_name = algo;
        const bn::Dag g = stage("discover:" + algo, [&] {
            if (kind == discovery::Algorithm::Pc) {
                auto r = discovery::pc_learn_detailed(imputed, cfg.learner.pc);
                for (const auto& e : r.order_forced) dot.dashed.emplace_back(r.dag.label(e.from), r.dag.label(e.to));
                return r.dag;
            }
            const bool stable = kind == discovery::Algorithm::NotearsStability ||
                                (kind == discovery::Algorithm::Notears && cfg.notears_stability);
            if (stable) {
                auto opts = cfg.learner.stability;
                opts.notears = cfg.learner.notears;
                opts.seed = seed;
                opts.jobs = cfg.jobs;
                auto r = discovery::stability_select(imputed, opts);
                out.write("stability." + algo + ".json", r.to_json());
                return r.dag;
            }
            return learner_for(algo, cfg)(imputed, seed);
        });
        out.write("dag." + algo + ".edges", edge_list(g));
        out.write("dag." + algo + ".dot", bn::to_dot(g, dot));

        const auto table = stage("effects:" + algo, [&] {
            const auto bn = bn::fit_cpts(g, imputed, cfg.ess);
            causal::EffectsOptions opts;
            opts.refute = cfg.refute;
            opts.seed = derive_seed(cfg.seed, "effects-" + algo);
            opts.refutation.ess = cfg.ess;
            auto t = causal::effects_for_dag(bn, imputed, opts);
            out.write("effects." + algo + ".csv", t.to_csv());
            out.write("effects." + algo + ".json", t.to_json());
            return t;
        });

        const auto tree = stage("chronology:" + algo, [&] {
            auto t = chronology::build_chronology(g, chronology::strong_causal_relations(table, g));
            out.write("chronology." + algo + ".edges", edge_list(t.tree));
            out.write("chronology." + algo + ".dot", t.to_dot(algo));
            out.write("chronology." + algo + ".json", t.to_json());
            return t;
        });

        std::size_t validated = 0;
        for (const auto& r : table.rows) validated += r.validated ? 1 : 0;
        json a;
        a["dag_edges"] = edges_json(g);
        a["relations"] = table.rows.size();
        a["validated_relations"] = validated;
        a["chronology_edges"] = edges_json(tree.tree);
        a["chronology_isolated"] = tree.isolated;
        per_algo[algo] = a;
        models.emplace_back(algo, g);
        models.emplace_back("chronology." + algo, tree.tree);
        trees.push_back(tree.tree);
    }
    report["algorithms"] = per_algo;

    stage("compare", [&] {
        for (const auto& [name, path] : cfg.references) {
            auto ref = bn::load_edge_list(path);
            models.emplace_back("reference." + name, std::move(ref));
        }
        const auto scores = chronology::compare_models(models, imputed, cfg.ess);
        out.write("scores.csv", chronology::scores_csv(scores));
        json s = json::array();
        for (const auto& m : scores) {
            s.push_back({{"model", m.name}, {"bic", m.bic}, {"log_likelihood", m.log_likelihood}, {"edges", m.edges}});
        }
        report["scores"] = s;
    });

    stage("falsify", [&] {
        json verdicts = json::object();
        for (const auto& [name, g] : models) {
            chronology::FalsifyOptions opts;
            opts.n_permutations = cfg.falsify_permutations;
            opts.alpha_ci = cfg.falsify_alpha_ci;
            opts.alpha_f = cfg.falsify_alpha_f;
            opts.seed = derive_seed(cfg.seed, "falsify-" + name);
            const auto v = chronology::falsify(g, imputed, opts);
            out.write("falsify." + safe_name(name) + ".json", v.to_json());
            verdicts[name] = {{"falsifiable", v.falsifiable}, {"falsified", v.falsified}, {"p_value", v.p_value}};
        }
        report["falsification"] = verdicts;
    });

    stage("consensus", [&] {
        const auto c = chronology::consensus_edges(trees);
        out.write("consensus.json", c.to_json());
        report["consensus"] = json::parse(c.to_json());
    });

    const std::string report_text = report.dump(2);
    out.write("report.json", report_text);

    json manifest;
    manifest["config_hash"] = hex64(config_hash);
    manifest["seed"] = cfg.seed;
    manifest["config"] = json::parse(config_text);
    json arts = json::array();
    for (const auto& [name, hash] : out.artifacts()) arts.push_back({{"file", name}, {"fnv1a", hex64(hash)}});
    manifest["artifacts"] = arts;
    std::ofstream(fs::path(cfg.output_dir) / "manifest.json", std::ios::binary) << manifest.dump(2);
    return report_text;
}

}  // namespace eventchron::pipeline
