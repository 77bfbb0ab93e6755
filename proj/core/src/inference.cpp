#include <algorithm>
#include <limits>
#include <set>

#include "eventchron/bayesnet.hpp"
#include "eventchron/error.hpp"

namespace eventchron::bn {

namespace {

/// Table factor; bit k of an index is the state of vars[k]. vars sorted.
struct Factor {
    std::vector<std::size_t> vars;
    std::vector<double> table;
};

std::size_t project(std::size_t assignment, const std::vector<std::size_t>& from_vars,
                    const std::vector<std::size_t>& to_vars) {
    // Both sorted; to_vars is a subset of from_vars.
    std::size_t out = 0;
    std::size_t j = 0;
    for (std::size_t k = 0; k < from_vars.size() && j < to_vars.size(); ++k) {
        if (from_vars[k] == to_vars[j]) {
            out |= ((assignment >> k) & 1U) << j;
            ++j;
        }
    }
    return out;
}

Factor multiply(const Factor& a, const Factor& b) {
    Factor out;
    std::set_union(a.vars.begin(), a.vars.end(), b.vars.begin(), b.vars.end(), std::back_inserter(out.vars));
    out.table.resize(std::size_t{1} << out.vars.size());
    for (std::size_t i = 0; i < out.table.size(); ++i) {
        out.table[i] = a.table[project(i, out.vars, a.vars)] * b.table[project(i, out.vars, b.vars)];
    }
    return out;
}

Factor sum_out(const Factor& f, std::size_t var) {
    Factor out;
    for (auto v : f.vars) {
        if (v != var) out.vars.push_back(v);
    }
    out.table.assign(std::size_t{1} << out.vars.size(), 0.0);
    for (std::size_t i = 0; i < f.table.size(); ++i) out.table[project(i, f.vars, out.vars)] += f.table[i];
    return out;
}

Factor cpt_factor(const Cpt& c) {
    Factor f;
    f.vars = c.parents;
    f.vars.push_back(c.node);
    std::sort(f.vars.begin(), f.vars.end());
    f.table.resize(std::size_t{1} << f.vars.size());
    std::vector<std::uint8_t> values(*std::max_element(f.vars.begin(), f.vars.end()) + 1, 0);
    for (std::size_t i = 0; i < f.table.size(); ++i) {
        for (std::size_t k = 0; k < f.vars.size(); ++k) values[f.vars[k]] = (i >> k) & 1U;
        f.table[i] = c.prob(values[c.node] != 0, c.assignment_index(values));
    }
    return f;
}

std::vector<double> marginal_enumeration(const DiscreteBayesNet& bn, const std::vector<std::size_t>& vars) {
    const std::size_t d = bn.size();
    if (d > 30) throw ValidationError("enumeration is limited to 30 nodes");
    std::vector<double> out(std::size_t{1} << vars.size(), 0.0);
    std::vector<std::uint8_t> values(d);
    const std::uint64_t total = std::uint64_t{1} << d;
    for (std::uint64_t s = 0; s < total; ++s) {
        for (std::size_t v = 0; v < d; ++v) values[v] = (s >> v) & 1U;
        std::size_t idx = 0;
        for (std::size_t k = 0; k < vars.size(); ++k) idx |= static_cast<std::size_t>(values[vars[k]]) << k;
        out[idx] += bn.joint(values);
    }
    return out;
}

std::vector<double> marginal_elimination(const DiscreteBayesNet& bn, const std::vector<std::size_t>& vars) {
    std::vector<Factor> factors;
    factors.reserve(bn.size());
    for (const auto& c : bn.cpts()) factors.push_back(cpt_factor(c));

    std::set<std::size_t> keep(vars.begin(), vars.end());
    std::set<std::size_t> to_eliminate;
    for (std::size_t v = 0; v < bn.size(); ++v) {
        if (!keep.count(v)) to_eliminate.insert(v);
    }

    while (!to_eliminate.empty()) {
        // Min-fill on the current interaction graph; ties go to the smallest id.
        std::size_t best = 0;
        std::size_t best_fill = std::numeric_limits<std::size_t>::max();
        for (auto v : to_eliminate) {
            std::set<std::size_t> nb;
            for (const auto& f : factors) {
                if (std::binary_search(f.vars.begin(), f.vars.end(), v)) nb.insert(f.vars.begin(), f.vars.end());
            }
            nb.erase(v);
            std::size_t fill = 0;
            for (auto a = nb.begin(); a != nb.end(); ++a) {
                for (auto b = std::next(a); b != nb.end(); ++b) {
                    bool linked = false;
                    for (const auto& f : factors) {
                        if (std::binary_search(f.vars.begin(), f.vars.end(), *a) &&
                            std::binary_search(f.vars.begin(), f.vars.end(), *b)) {
                            linked = true;
                            break;
                        }
                    }
                    if (!linked) ++fill;
                }
            }
            if (fill < best_fill) {
                best_fill = fill;
                best = v;
            }
        }
        to_eliminate.erase(best);

        Factor product{{}, {1.0}};
        std::vector<Factor> rest;
        for (auto& f : factors) {
            if (std::binary_search(f.vars.begin(), f.vars.end(), best)) {
                product = multiply(product, f);
            } else {
                rest.push_back(std::move(f));
            }
        }
        rest.push_back(sum_out(product, best));
        factors = std::move(rest);
    }

    Factor product{{}, {1.0}};
    for (const auto& f : factors) product = multiply(product, f);

    // Reorder from sorted variable order to the caller's order.
    std::vector<double> out(std::size_t{1} << vars.size(), 0.0);
    for (std::size_t i = 0; i < out.size(); ++i) {
        std::size_t src = 0;
        for (std::size_t k = 0; k < vars.size(); ++k) {
            const auto pos = static_cast<std::size_t>(
                std::lower_bound(product.vars.begin(), product.vars.end(), vars[k]) - product.vars.begin());
            src |= ((i >> k) & 1U) << pos;
        }
        out[i] = product.table[src];
    }
    return out;
}

}  // namespace

std::vector<double> marginal(const DiscreteBayesNet& bn, const std::vector<std::size_t>& vars,
                             InferenceMethod method) {
    std::set<std::size_t> uniq(vars.begin(), vars.end());
    if (uniq.size() != vars.size()) throw ValidationError("marginal variables must be distinct");
    for (auto v : vars) {
        if (v >= bn.size()) throw ValidationError("marginal variable out of range");
    }
    if (method == InferenceMethod::Auto) {
        method = bn.size() <= kEnumerationLimit ? InferenceMethod::Enumeration : InferenceMethod::VariableElimination;
    }
    return method == InferenceMethod::Enumeration ? marginal_enumeration(bn, vars) : marginal_elimination(bn, vars);
}

double query(const DiscreteBayesNet& bn, std::size_t target, const Evidence& evidence, InferenceMethod method) {
    if (target >= bn.size()) throw ValidationError("query target out of range");
    std::vector<std::size_t> vars{target};
    std::vector<std::pair<std::size_t, bool>> ev;
    for (const auto& [v, value] : evidence) {
        if (v >= bn.size()) throw ValidationError("evidence node out of range");
        auto pos = std::find(vars.begin(), vars.end(), v);
        if (pos == vars.end()) {
            vars.push_back(v);
            pos = vars.end() - 1;
        }
        ev.emplace_back(static_cast<std::size_t>(pos - vars.begin()), value);
    }
    const auto table = marginal(bn, vars, method);

    double p_evidence = 0.0;
    double p_joint = 0.0;
    for (std::size_t i = 0; i < table.size(); ++i) {
        bool consistent = true;
        for (const auto& [k, value] : ev) {
            if (((i >> k) & 1U) != static_cast<std::size_t>(value)) {
                consistent = false;
                break;
            }
        }
        if (!consistent) continue;
        p_evidence += table[i];
        if (i & 1U) p_joint += table[i];
    }
    if (p_evidence <= 0.0) {
        throw ZeroProbabilityEvidence("evidence has probability zero when querying '" + bn.dag().label(target) + "'");
    }
    return std::clamp(p_joint / p_evidence, 0.0, 1.0);
}

}  // namespace eventchron::bn
