#include "eventchron/causal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "eventchron/error.hpp"
#include "eventchron/rng.hpp"

namespace eventchron::causal {

std::string estimand_name(EstimandKind k) { return k == EstimandKind::Ace ? "ACE" : "NDE"; }

EstimandKind parse_estimand(const std::string& name) {
    if (name == "ACE" || name == "ace") return EstimandKind::Ace;
    if (name == "NDE" || name == "nde") return EstimandKind::Nde;
    throw ValidationError("unknown estimand '" + name + "'");
}

std::string refutation_name(RefutationKind k) {
    switch (k) {
        case RefutationKind::Placebo: return "placebo";
        case RefutationKind::Subset: return "subset";
        case RefutationKind::RandomCommonCause: return "random_common_cause";
    }
    return "unknown";
}

RefutationKind parse_refutation(const std::string& name) {
    if (name == "placebo") return RefutationKind::Placebo;
    if (name == "subset") return RefutationKind::Subset;
    if (name == "random_common_cause" || name == "rcc") return RefutationKind::RandomCommonCause;
    throw ValidationError("unknown refutation '" + name + "'");
}

std::optional<bool> EffectEstimate::refutation_passed(RefutationKind k) const {
    for (const auto& r : refutations) {
        if (r.kind == k) return r.passed;
    }
    return std::nullopt;
}

namespace {

std::vector<std::string> labels_of(const bn::Dag& g, const std::vector<std::size_t>& idx) {
    std::vector<std::string> out;
    for (auto i : idx) out.push_back(g.label(i));
    return out;
}

std::vector<std::size_t> mediator_nodes(const bn::Dag& g, std::size_t x, std::size_t y) {
    const auto down = g.descendants(x);
    const auto up = g.ancestors(y);
    std::vector<std::size_t> out;
    for (std::size_t v = 0; v < g.size(); ++v) {
        if (v != x && v != y && down[v] && up[v]) out.push_back(v);
    }
    return out;
}

void verify_backdoor(const bn::Dag& g, std::size_t x, std::size_t y, const std::vector<std::size_t>& z) {
    if (std::find(z.begin(), z.end(), y) != z.end())
        throw ValidationError("'" + g.label(y) + "' is a parent of '" + g.label(x) + "'; no backdoor set exists");
    const auto down = g.descendants(x);
    for (auto v : z) {
        if (down[v]) throw Error("backdoor check failed: '" + g.label(v) + "' descends from the treatment");
    }
    std::vector<bn::Edge> cut;
    for (const auto& e : g.edges()) {
        if (e.from != x) cut.push_back(e);
    }
    if (!bn::d_separated(g.with_edges(std::move(cut)), x, y, z))
        throw Error("backdoor check failed for " + g.label(x) + " -> " + g.label(y));
}

}  // namespace

std::vector<std::string> backdoor_set(const bn::Dag& g, const std::string& x, const std::string& y) {
    const auto xi = g.index_of(x), yi = g.index_of(y);
    if (xi == yi) throw ValidationError("treatment and outcome must differ");
    const auto& z = g.parents(xi);
    verify_backdoor(g, xi, yi, z);
    return labels_of(g, z);
}

std::vector<std::string> mediators(const bn::Dag& g, const std::string& x, const std::string& y) {
    return labels_of(g, mediator_nodes(g, g.index_of(x), g.index_of(y)));
}

double mediation_formula(const bn::DiscreteBayesNet& bn, std::size_t x, std::size_t y,
                         const std::vector<std::size_t>& mediator_nodes) {
    const auto& g = bn.dag();
    const auto& z = g.parents(x);
    std::vector<std::size_t> vars{y, x};
    vars.insert(vars.end(), mediator_nodes.begin(), mediator_nodes.end());
    vars.insert(vars.end(), z.begin(), z.end());
    const auto table = bn::marginal(bn, vars);
    const std::size_t nm = mediator_nodes.size(), nz = z.size();
    const auto at = [&](std::size_t yv, std::size_t xv, std::size_t m, std::size_t zz) {
        return table[yv | xv << 1 | m << 2 | zz << (2 + nm)];
    };
    const auto evidence = [&](std::size_t m, std::size_t zz) {
        bn::Evidence ev;
        for (std::size_t k = 0; k < nm; ++k) ev.emplace_back(mediator_nodes[k], (m >> k & 1U) != 0);
        for (std::size_t k = 0; k < nz; ++k) ev.emplace_back(z[k], (zz >> k & 1U) != 0);
        return ev;
    };
    // Strata the observational model never visits are read off the clamped networks.
    const auto clamped_outcome = [&](bool xv, std::size_t m, std::size_t zz) {
        try {
            return bn::query(bn.intervened(x, xv), y, evidence(m, zz));
        } catch (const ZeroProbabilityEvidence&) {
            return 0.0;
        }
    };

    double total = 0.0;
    for (std::size_t zz = 0; zz < (std::size_t{1} << nz); ++zz) {
        double pz = 0.0, px0z = 0.0;
        for (std::size_t m = 0; m < (std::size_t{1} << nm); ++m) {
            for (std::size_t yv = 0; yv < 2; ++yv) {
                pz += at(yv, 0, m, zz) + at(yv, 1, m, zz);
                px0z += at(yv, 0, m, zz);
            }
        }
        if (pz <= 0.0) continue;
        std::vector<double> clamped_weights;
        if (px0z <= 0.0 && nm > 0) {
            const auto table0 = bn::marginal(bn.intervened(x, false), vars);
            double norm = 0.0;
            clamped_weights.assign(std::size_t{1} << nm, 0.0);
            for (std::size_t m = 0; m < clamped_weights.size(); ++m) {
                for (std::size_t yv = 0; yv < 2; ++yv) clamped_weights[m] += table0[yv | m << 2 | zz << (2 + nm)];
                norm += clamped_weights[m];
            }
            for (auto& w : clamped_weights) w = norm > 0.0 ? w / norm : 0.0;
        }
        for (std::size_t m = 0; m < (std::size_t{1} << nm); ++m) {
            const double px0mz = at(0, 0, m, zz) + at(1, 0, m, zz);
            const double px1mz = at(0, 1, m, zz) + at(1, 1, m, zz);
            double weight = 1.0;
            if (nm > 0) weight = px0z > 0.0 ? px0mz / px0z : clamped_weights[m];
            if (weight <= 0.0) continue;
            const double p1 = px1mz > 0.0 ? at(1, 1, m, zz) / px1mz : clamped_outcome(true, m, zz);
            const double p0 = px0mz > 0.0 ? at(1, 0, m, zz) / px0mz : clamped_outcome(false, m, zz);
            total += (p1 - p0) * weight * pz;
        }
    }
    return total;
}

EffectEstimate ace(const bn::DiscreteBayesNet& bn, const std::string& x, const std::string& y) {
    const auto& g = bn.dag();
    const auto xi = g.index_of(x), yi = g.index_of(y);
    if (xi == yi) throw ValidationError("treatment and outcome must differ");
    EffectEstimate e;
    e.treatment = x;
    e.outcome = y;
    e.kind = EstimandKind::Ace;
    e.adjustment_set = labels_of(g, g.parents(xi));
    if (g.reachable(xi, yi)) {
        verify_backdoor(g, xi, yi, g.parents(xi));
        e.value = mediation_formula(bn, xi, yi, {});
    }
    e.total_effect = e.value;
    return e;
}

double ace_surgery(const bn::DiscreteBayesNet& bn, const std::string& x, const std::string& y) {
    const auto xi = bn.dag().index_of(x), yi = bn.dag().index_of(y);
    return bn::query(bn.intervened(xi, true), yi) - bn::query(bn.intervened(xi, false), yi);
}

EffectEstimate nde(const bn::DiscreteBayesNet& bn, const std::string& x, const std::string& y) {
    const auto& g = bn.dag();
    const auto xi = g.index_of(x), yi = g.index_of(y);
    const auto m = mediator_nodes(g, xi, yi);
    if (m.empty()) throw ValidationError("no mediators between '" + x + "' and '" + y + "'; use ace");
    EffectEstimate e = ace(bn, x, y);
    e.kind = EstimandKind::Nde;
    e.mediators = labels_of(g, m);
    e.value = mediation_formula(bn, xi, yi, m);
    return e;
}

namespace {

double re_estimate(const bn::DiscreteBayesNet& bn, const std::string& x, const std::string& y, EstimandKind kind) {
    if (kind == EstimandKind::Nde) {
        const auto& g = bn.dag();
        const auto xi = g.index_of(x), yi = g.index_of(y);
        const auto m = mediator_nodes(g, xi, yi);
        if (!m.empty()) return mediation_formula(bn, xi, yi, m);
    }
    return ace(bn, x, y).value;
}

std::string fresh_label(const std::vector<std::string>& taken, const std::string& base) {
    std::string label = base;
    for (int k = 1; std::find(taken.begin(), taken.end(), label) != taken.end(); ++k) label = base + std::to_string(k);
    return label;
}

}  // namespace

RefutationResult refute(const bn::DiscreteBayesNet& bn, const data::EventMatrix& data, const EffectEstimate& estimate,
                        RefutationKind kind, std::uint64_t seed, const RefutationOptions& options) {
    const auto& g = bn.dag();
    auto columns = bn::BinaryData::from(data, g.nodes()).columns;
    const std::size_t n = data.rows();
    const auto xi = g.index_of(estimate.treatment);
    Rng rng(seed);
    RefutationResult out;
    out.kind = kind;

    switch (kind) {
        case RefutationKind::Placebo: {
            double rate = 0.0;
            for (auto v : columns[xi]) rate += v;
            rate /= static_cast<double>(std::max<std::size_t>(n, 1));
            for (auto& v : columns[xi]) v = rng.bernoulli(rate) ? 1 : 0;
            const auto refit = bn::fit_cpts(g, data::EventMatrix::from_columns(g.nodes(), columns), options.ess);
            out.refuted_value = re_estimate(refit, estimate.treatment, estimate.outcome, estimate.kind);
            out.tolerance = options.placebo_tolerance;
            out.passed = std::abs(out.refuted_value) <= out.tolerance;
            break;
        }
        case RefutationKind::Subset: {
            if (options.subset_count == 0) throw ValidationError("subset refutation needs at least one subset");
            const auto m = std::max<std::size_t>(
                1, static_cast<std::size_t>(std::ceil(options.subset_fraction * static_cast<double>(n) - 1e-9)));
            const auto full = data.select_columns(g.nodes());
            double sum = 0.0;
            for (std::size_t s = 0; s < options.subset_count; ++s) {
                auto rows = rng.sample_without_replacement(n, m);
                std::sort(rows.begin(), rows.end());
                const auto refit = bn::fit_cpts(g, full.select_rows(rows), options.ess);
                sum += re_estimate(refit, estimate.treatment, estimate.outcome, estimate.kind);
            }
            out.refuted_value = sum / static_cast<double>(options.subset_count);
            out.tolerance = options.subset_relative_tolerance * std::abs(estimate.value) + options.subset_absolute_tolerance;
            out.passed = std::abs(out.refuted_value - estimate.value) <= out.tolerance;
            break;
        }
        case RefutationKind::RandomCommonCause: {
            auto labels = g.nodes();
            const auto u = labels.size();
            labels.push_back(fresh_label(labels, "random_common_cause"));
            std::vector<std::uint8_t> coin(n);
            for (auto& v : coin) v = rng.bernoulli(0.5) ? 1 : 0;
            columns.push_back(std::move(coin));
            auto edges = g.edges();
            edges.push_back({u, xi});
            edges.push_back({u, g.index_of(estimate.outcome)});
            const bn::Dag augmented(labels, std::move(edges));
            const auto refit = bn::fit_cpts(augmented, data::EventMatrix::from_columns(labels, columns), options.ess);
            out.refuted_value = re_estimate(refit, estimate.treatment, estimate.outcome, estimate.kind);
            out.tolerance = options.common_cause_tolerance;
            out.passed = std::abs(out.refuted_value - estimate.value) <= out.tolerance;
            break;
        }
    }
    return out;
}

namespace {

std::string number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string joined(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) out += (i ? ";" : "") + items[i];
    return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(s);
    while (std::getline(ss, field, sep)) out.push_back(field);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

std::string pass_cell(const EffectEstimate& e, RefutationKind k) {
    const auto p = e.refutation_passed(k);
    return p ? (*p ? "true" : "false") : "";
}

}  // namespace

std::string CausalRelationTable::to_csv() const {
    std::string out = "treatment,outcome,kind,value,adjustment_set,mediators,validated,placebo_pass,subset_pass,rcc_pass\n";
    for (const auto& r : rows) {
        out += r.treatment + "," + r.outcome + "," + estimand_name(r.kind) + "," + number(r.value) + "," +
               joined(r.adjustment_set) + "," + joined(r.mediators) + "," + (r.validated ? "true" : "false") + "," +
               pass_cell(r, RefutationKind::Placebo) + "," + pass_cell(r, RefutationKind::Subset) + "," +
               pass_cell(r, RefutationKind::RandomCommonCause) + "\n";
    }
    return out;
}

std::string CausalRelationTable::to_json() const {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        nlohmann::ordered_json j;
        j["treatment"] = r.treatment;
        j["outcome"] = r.outcome;
        j["kind"] = estimand_name(r.kind);
        j["value"] = r.value;
        j["adjustment_set"] = r.adjustment_set;
        j["mediators"] = r.mediators;
        j["total_effect"] = r.total_effect;
        if (r.kind == EstimandKind::Nde) j["nie"] = r.total_effect - r.value;
        j["validated"] = r.validated;
        auto refs = nlohmann::ordered_json::array();
        for (const auto& f : r.refutations) {
            refs.push_back({{"kind", refutation_name(f.kind)},
                            {"refuted_value", f.refuted_value},
                            {"tolerance", f.tolerance},
                            {"passed", f.passed}});
        }
        j["refutations"] = refs;
        if (!r.error.empty()) j["error"] = r.error;
        arr.push_back(j);
    }
    return arr.dump(2);
}

CausalRelationTable CausalRelationTable::from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("relation table is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split(line, ',');
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
    for (const char* need : {"treatment", "outcome", "value", "validated"}) {
        if (!col.count(need)) throw ValidationError(std::string("relation table lacks column '") + need + "'");
    }
    const auto get = [&](const std::vector<std::string>& f, const std::string& name) -> std::string {
        const auto it = col.find(name);
        return it != col.end() && it->second < f.size() ? f[it->second] : std::string{};
    };
    const auto list = [](const std::string& s) {
        std::vector<std::string> out;
        if (!s.empty()) out = split(s, ';');
        return out;
    };
    CausalRelationTable t;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = split(line, ',');
        EffectEstimate e;
        e.treatment = get(f, "treatment");
        e.outcome = get(f, "outcome");
        if (e.treatment.empty() || e.outcome.empty())
            throw ValidationError("relation table line " + std::to_string(line_no) + ": missing label");
        if (const auto k = get(f, "kind"); !k.empty()) e.kind = parse_estimand(k);
        try {
            e.value = std::stod(get(f, "value"));
        } catch (const std::exception&) {
            throw ValidationError("relation table line " + std::to_string(line_no) + ": bad value");
        }
        e.total_effect = e.value;
        e.validated = get(f, "validated") == "true";
        e.adjustment_set = list(get(f, "adjustment_set"));
        e.mediators = list(get(f, "mediators"));
        const std::pair<const char*, RefutationKind> refs[] = {{"placebo_pass", RefutationKind::Placebo},
                                                                {"subset_pass", RefutationKind::Subset},
                                                                {"rcc_pass", RefutationKind::RandomCommonCause}};
        for (const auto& [name, kind] : refs) {
            const auto v = get(f, name);
            if (!v.empty()) e.refutations.push_back({kind, 0.0, v == "true", 0.0});
        }
        t.rows.push_back(std::move(e));
    }
    return t;
}

CausalRelationTable effects_for_dag(const bn::DiscreteBayesNet& bn, const data::EventMatrix& data,
                                    const EffectsOptions& options) {
    const auto& g = bn.dag();
    CausalRelationTable table;
    for (std::size_t k = 0; k < g.edges().size(); ++k) {
        const auto& edge = g.edges()[k];
        const auto& x = g.label(edge.from);
        const auto& y = g.label(edge.to);
        EffectEstimate e;
        try {
            e = mediator_nodes(g, edge.from, edge.to).empty() ? ace(bn, x, y) : nde(bn, x, y);
            if (options.refute) {
                for (auto kind : {RefutationKind::Placebo, RefutationKind::Subset, RefutationKind::RandomCommonCause}) {
                    const auto s = derive_seed(options.seed, "refute-" + refutation_name(kind), k);
                    e.refutations.push_back(refute(bn, data, e, kind, s, options.refutation));
                }
            }
        } catch (const std::exception& ex) {
            e.treatment = x;
            e.outcome = y;
            e.error = ex.what();
        }
        e.validated = e.error.empty() && e.value > 0.0;
        table.rows.push_back(std::move(e));
    }
    std::stable_sort(table.rows.begin(), table.rows.end(),
                     [](const EffectEstimate& a, const EffectEstimate& b) { return a.value > b.value; });
    return table;
}

}  // namespace eventchron::causal
