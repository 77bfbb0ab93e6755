#ifndef EVENTCHRON_STATS_HPP
#define EVENTCHRON_STATS_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "eventchron/bayesnet.hpp"
#include "eventchron/dataset.hpp"

namespace eventchron::discovery {

struct CiResult {
    double p_value = 1.0;
    double statistic = 0.0;
    std::size_t df = 0;
    /// Every stratum was too small to test; p_value is 1 by convention.
    bool degenerate = false;
};

/// Strata with fewer rows than this are skipped by the G² test.
inline constexpr std::size_t kMinStratumRows = 5;

/// G² likelihood-ratio test of x independent of y given z, summed over the
/// 2x2 tables of each z-stratum with one degree of freedom per tested stratum.
CiResult ci_test_g2(const bn::BinaryData& data, std::size_t x, std::size_t y, const std::vector<std::size_t>& z);

/// Label-based form. Rows with a missing cell in x, y or z are omitted, so
/// the marginal test (z empty) runs on pairwise-complete rows.
CiResult ci_test_g2(const data::EventMatrix& m, const std::string& x, const std::string& y,
                    const std::vector<std::string>& z = {});

/// Two-sided Fisher exact test: total probability of tables with the same
/// margins that are no more likely than the observed one.
double fisher_exact(const data::ContingencyTable& t);

/// Upper tail of the chi-square distribution.
double chi_square_sf(double statistic, double df);

enum class Correction { BenjaminiHochberg, Bonferroni };
std::vector<double> adjust_p_values(const std::vector<double>& p, Correction method);

}  // namespace eventchron::discovery

#endif  // EVENTCHRON_STATS_HPP
