#include "eventchron/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>

#include "eventchron/error.hpp"

namespace eventchron::discovery {

double chi_square_sf(double statistic, double df) {
    if (df <= 0.0) return 1.0;
    if (statistic <= 0.0) return 1.0;
    return boost::math::gamma_q(df / 2.0, statistic / 2.0);
}

CiResult ci_test_g2(const bn::BinaryData& data, std::size_t x, std::size_t y, const std::vector<std::size_t>& z) {
    if (x == y) throw ValidationError("G2 test needs distinct variables");
    const std::size_t strata = std::size_t{1} << z.size();
    std::vector<std::array<std::size_t, 4>> counts(strata, {0, 0, 0, 0});
    const auto& cx = data.columns.at(x);
    const auto& cy = data.columns.at(y);
    for (std::size_t r = 0; r < data.n_rows; ++r) {
        std::size_t s = 0;
        for (auto v : z) s = (s << 1) | data.columns[v][r];
        ++counts[s][(cx[r] << 1) | cy[r]];
    }
    CiResult res;
    for (const auto& c : counts) {
        const std::size_t n = c[0] + c[1] + c[2] + c[3];
        if (n < kMinStratumRows) continue;
        const double nn = static_cast<double>(n);
        const double row[2] = {static_cast<double>(c[0] + c[1]), static_cast<double>(c[2] + c[3])};
        const double col[2] = {static_cast<double>(c[0] + c[2]), static_cast<double>(c[1] + c[3])};
        for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < 2; ++j) {
                const double o = static_cast<double>(c[(i << 1) | j]);
                if (o > 0.0) res.statistic += 2.0 * o * std::log(o * nn / (row[i] * col[j]));
            }
        }
        ++res.df;
    }
    if (res.df == 0) {
        res.degenerate = true;
        res.p_value = 1.0;
        res.statistic = 0.0;
        return res;
    }
    res.statistic = std::max(res.statistic, 0.0);
    res.p_value = chi_square_sf(res.statistic, static_cast<double>(res.df));
    return res;
}

CiResult ci_test_g2(const data::EventMatrix& m, const std::string& x, const std::string& y,
                    const std::vector<std::string>& z) {
    std::vector<std::size_t> cols{m.column_index(x), m.column_index(y)};
    for (const auto& l : z) cols.push_back(m.column_index(l));
    bn::BinaryData d;
    d.columns.assign(cols.size(), {});
    for (std::size_t r = 0; r < m.rows(); ++r) {
        bool complete = true;
        for (auto c : cols) {
            if (m.at(r, c) == data::Cell::Missing) {
                complete = false;
                break;
            }
        }
        if (!complete) continue;
        for (std::size_t k = 0; k < cols.size(); ++k) d.columns[k].push_back(m.at(r, cols[k]) == data::Cell::One);
        ++d.n_rows;
    }
    std::vector<std::size_t> zi(z.size());
    std::iota(zi.begin(), zi.end(), 2);
    return ci_test_g2(d, 0, 1, zi);
}

double fisher_exact(const data::ContingencyTable& t) {
    const std::size_t n = t.total();
    if (n == 0) throw ValidationError("Fisher test on an empty table");
    const auto lfact = [](std::size_t k) { return std::lgamma(static_cast<double>(k) + 1.0); };
    const std::size_t r1 = t.n10 + t.n11;
    const std::size_t r0 = t.n00 + t.n01;
    const std::size_t c1 = t.n01 + t.n11;
    const std::size_t c0 = t.n00 + t.n10;
    const double base = lfact(r0) + lfact(r1) + lfact(c0) + lfact(c1) - lfact(n);
    // k = n11; the other cells follow from the margins.
    const auto log_p = [&](std::size_t k) {
        return base - lfact(k) - lfact(r1 - k) - lfact(c1 - k) - lfact(r0 - (c1 - k));
    };
    const std::size_t lo = (r1 + c1 > n) ? r1 + c1 - n : 0;
    const std::size_t hi = std::min(r1, c1);
    const double observed = log_p(t.n11);
    const double slack = 1e-7;
    double p = 0.0;
    for (std::size_t k = lo; k <= hi; ++k) {
        const double lp = log_p(k);
        if (lp <= observed + std::log1p(slack)) p += std::exp(lp);
    }
    return std::min(p, 1.0);
}

std::vector<double> adjust_p_values(const std::vector<double>& p, Correction method) {
    const std::size_t m = p.size();
    std::vector<double> out(m);
    if (m == 0) return out;
    if (method == Correction::Bonferroni) {
        for (std::size_t i = 0; i < m; ++i) out[i] = std::min(1.0, p[i] * static_cast<double>(m));
        return out;
    }
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
    double running = 1.0;
    for (std::size_t rank = m; rank-- > 0;) {
        const std::size_t i = order[rank];
        running = std::min(running, p[i] * static_cast<double>(m) / static_cast<double>(rank + 1));
        out[i] = running;
    }
    return out;
}

}  // namespace eventchron::discovery
