#include <gtest/gtest.h>

#include <cmath>

#include "eventchron/bayesnet.hpp"
#include "eventchron/error.hpp"
#include "eventchron/rng.hpp"
#include "eventchron/stats.hpp"
#include "fixtures.hpp"

using namespace eventchron;
using discovery::fisher_exact;

namespace {

data::ContingencyTable table(std::size_t n00, std::size_t n01, std::size_t n10, std::size_t n11) {
    return {"a", "b", n00, n01, n10, n11};
}

}  // namespace

// Reference values from scipy.stats.fisher_exact.
TEST(Fisher, PerfectSeparation) {
    EXPECT_NEAR(fisher_exact(table(10, 0, 0, 10)), 2.0 / 184756.0, 1e-15);
    EXPECT_NEAR(fisher_exact(table(10, 0, 0, 10)), 1.082508822446903e-05, 1e-15);
}

TEST(Fisher, Independence) { EXPECT_NEAR(fisher_exact(table(5, 5, 5, 5)), 1.0, 1e-12); }

TEST(Fisher, SmallTables) {
    EXPECT_NEAR(fisher_exact(table(3, 1, 1, 3)), 0.48571428571428565, 1e-12);
    EXPECT_NEAR(fisher_exact(table(12, 5, 3, 9)), 0.02532768703367614, 1e-12);
}

TEST(Fisher, NdhdPair) {
    const auto t = data::contingency(fixtures::ndhd_pair(), "ndhD_116494", "ndhD_116785");
    const double p = fisher_exact(t);
    EXPECT_LT(p, 1e-6);
    EXPECT_NEAR(p / 3.142726508007269e-12, 1.0, 1e-6);
}

TEST(Fisher, EmptyTableRejected) { EXPECT_THROW(fisher_exact(table(0, 0, 0, 0)), ValidationError); }

TEST(ChiSquare, Tail) {
    EXPECT_NEAR(discovery::chi_square_sf(3.84, 1), 0.05004352124870519, 1e-12);
    EXPECT_NEAR(discovery::chi_square_sf(10.0, 4), 0.04042768199451279, 1e-12);
}

TEST(G2, NdhdPairMarginal) {
    const auto r = discovery::ci_test_g2(fixtures::ndhd_pair(), "ndhD_116494", "ndhD_116785");
    EXPECT_EQ(r.df, 1u);
    EXPECT_NEAR(r.statistic, 49.81381701293946, 1e-9);
    EXPECT_LT(r.p_value, 1e-6);
    EXPECT_NEAR(r.p_value / 1.6904929440961237e-12, 1.0, 1e-6);
}

TEST(G2, IdenticalColumns) {
    Rng rng(3);
    std::vector<std::uint8_t> x(100);
    for (auto& v : x) v = rng.bernoulli(0.5);
    const auto m = data::EventMatrix::from_columns({"x", "y"}, {x, x});
    EXPECT_LT(discovery::ci_test_g2(m, "x", "y").p_value, 1e-10);
}

TEST(G2, IndependentColumnsGiveRoughlyUniformP) {
    double total = 0.0;
    const int reps = 200;
    for (int rep = 0; rep < reps; ++rep) {
        Rng rng(derive_seed(11, "g2-null", rep));
        std::vector<std::uint8_t> x(500), y(500);
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] = rng.bernoulli(0.4);
            y[i] = rng.bernoulli(0.6);
        }
        const auto m = data::EventMatrix::from_columns({"x", "y"}, {x, y});
        total += discovery::ci_test_g2(m, "x", "y").p_value;
    }
    EXPECT_NEAR(total / reps, 0.5, 0.06);
}

TEST(G2, SmallStrataSkipped) {
    // z = 1 has only 3 rows, so only the z = 0 stratum is tested.
    std::vector<std::uint8_t> x, y, z;
    for (int i = 0; i < 40; ++i) {
        x.push_back(i % 2);
        y.push_back((i / 2) % 2);
        z.push_back(0);
    }
    for (int i = 0; i < 3; ++i) {
        x.push_back(1);
        y.push_back(1);
        z.push_back(1);
    }
    const auto m = data::EventMatrix::from_columns({"x", "y", "z"}, {x, y, z});
    const auto r = discovery::ci_test_g2(m, "x", "y", {"z"});
    EXPECT_EQ(r.df, 1u);
    EXPECT_FALSE(r.degenerate);
}

TEST(G2, AllStrataSkippedIsDegenerate) {
    const auto m = data::EventMatrix::from_columns({"x", "y", "z"}, {{0, 1, 1}, {1, 1, 0}, {0, 0, 1}});
    const auto r = discovery::ci_test_g2(m, "x", "y", {"z"});
    EXPECT_TRUE(r.degenerate);
    EXPECT_EQ(r.p_value, 1.0);
}

TEST(Adjust, BenjaminiHochberg) {
    const auto q = discovery::adjust_p_values({0.01, 0.04, 0.03, 0.005, 0.5},
                                              discovery::Correction::BenjaminiHochberg);
    const std::vector<double> expected{0.025, 0.05, 0.05, 0.025, 0.5};
    ASSERT_EQ(q.size(), expected.size());
    for (std::size_t i = 0; i < q.size(); ++i) EXPECT_NEAR(q[i], expected[i], 1e-12);
}

TEST(Adjust, BonferroniCapsAtOne) {
    const auto q = discovery::adjust_p_values({0.01, 0.3, 0.6}, discovery::Correction::Bonferroni);
    EXPECT_NEAR(q[0], 0.03, 1e-15);
    EXPECT_NEAR(q[1], 0.9, 1e-15);
    EXPECT_EQ(q[2], 1.0);
}

TEST(Rng, DerivedSeedsDiffer) {
    EXPECT_NE(derive_seed(1, "a"), derive_seed(1, "b"));
    EXPECT_NE(derive_seed(1, "a", 0), derive_seed(1, "a", 1));
    EXPECT_EQ(derive_seed(9, "x", 3), derive_seed(9, "x", 3));
}

TEST(Rng, SampleWithoutReplacementIsDistinct) {
    Rng rng(5);
    auto s = rng.sample_without_replacement(50, 40);
    std::sort(s.begin(), s.end());
    EXPECT_EQ(std::unique(s.begin(), s.end()), s.end());
    EXPECT_LT(s.back(), 50u);
}
