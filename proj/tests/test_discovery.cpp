#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include <unsupported/Eigen/MatrixFunctions>

#include "eventchron/bayesnet.hpp"
#include "eventchron/discovery.hpp"
#include "eventchron/error.hpp"
#include "eventchron/pipeline.hpp"
#include "eventchron/rng.hpp"

using namespace eventchron;
using bn::Dag;
using bn::Edge;

namespace {

/// A -> B -> C with P(child=1 | parent=1) = 0.9 and P(child=1 | parent=0) = 0.1.
bn::DiscreteBayesNet abc_chain() {
    Dag g({"A", "B", "C"}, std::vector<Edge>{{0, 1}, {1, 2}});
    return bn::DiscreteBayesNet(g, {bn::Cpt{0, {}, {0.5}}, bn::Cpt{1, {0}, {0.1, 0.9}}, bn::Cpt{2, {1}, {0.1, 0.9}}});
}

data::EventMatrix independent_columns(std::size_t d, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::string> labels;
    std::vector<std::vector<std::uint8_t>> cols(d, std::vector<std::uint8_t>(n));
    for (std::size_t j = 0; j < d; ++j) {
        labels.push_back("x" + std::to_string(j + 1));
        const double p = 0.2 + 0.1 * static_cast<double>(j);
        for (auto& v : cols[j]) v = rng.bernoulli(p);
    }
    return data::EventMatrix::from_columns(labels, cols);
}

bool same_skeleton(const Dag& a, const Dag& b) {
    if (a.size() != b.size() || a.edge_count() != b.edge_count()) return false;
    for (const auto& e : b.edges()) {
        if (!a.adjacent(e.from, e.to)) return false;
    }
    return true;
}

/// Gaussian chain SEM x_{i+1} = 0.9 x_i + N(0, 1).
discovery::NumericData gaussian_chain(std::size_t d, std::size_t n, std::uint64_t seed) {
    std::mt19937_64 engine(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    discovery::NumericData out;
    out.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (std::size_t j = 0; j < d; ++j) out.labels.push_back("x" + std::to_string(j + 1));
    for (std::size_t r = 0; r < n; ++r) {
        double prev = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            prev = (j == 0 ? 0.0 : 0.9 * prev) + noise(engine);
            out.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = prev;
        }
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------- hill climbing

TEST(HillClimbing, RecoversChainSkeleton) {
    const auto truth = abc_chain();
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto g = discovery::hc_learn(bn::sample(truth, 5000, seed));
        EXPECT_TRUE(same_skeleton(g, truth.dag())) << "seed " << seed;
        EXPECT_FALSE(g.adjacent(0, 2));
    }
}

TEST(HillClimbing, IndependentColumnsGiveEmptyGraph) {
    int empty = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        empty += discovery::hc_learn(independent_columns(4, 10000, seed)).edge_count() == 0;
    }
    EXPECT_GE(empty, 19);
}

TEST(HillClimbing, SingleRowGivesEmptyGraph) {
    const auto m = data::EventMatrix::from_columns({"a", "b", "c"}, {{1}, {1}, {0}});
    EXPECT_EQ(discovery::hc_learn(m).edge_count(), 0u);
}

TEST(HillClimbing, ScoreTraceStrictlyIncreasing) {
    const auto r = discovery::hc_learn_traced(bn::sample(pipeline::preset_network("diamond"), 3000, 4));
    ASSERT_GE(r.score_trace.size(), 2u);
    for (std::size_t i = 1; i < r.score_trace.size(); ++i) EXPECT_GT(r.score_trace[i], r.score_trace[i - 1]);
    EXPECT_NEAR(r.score_trace.back(), bn::bic_score(r.dag, bn::sample(pipeline::preset_network("diamond"), 3000, 4)),
                1e-6);
}

TEST(HillClimbing, MaxIndegreeRespected) {
    const auto m = bn::sample(pipeline::preset_network("collider"), 5000, 9);
    discovery::HcOptions opt;
    opt.max_indegree = 1;
    const auto g = discovery::hc_learn(m, opt);
    for (std::size_t v = 0; v < g.size(); ++v) EXPECT_LE(g.parents(v).size(), 1u);
}

TEST(HillClimbing, Deterministic) {
    const auto m = bn::sample(pipeline::preset_network("chain"), 2000, 3);
    EXPECT_EQ(discovery::hc_learn(m), discovery::hc_learn(m));
}

TEST(HillClimbing, RejectsIncompleteOrNarrowData) {
    EXPECT_THROW(discovery::hc_learn(data::EventMatrix::from_columns({"a"}, {{1, 0}})), ValidationError);
}

// ---------------------------------------------------------------- PC

TEST(Pc, ChainSkeletonAndSepset) {
    const auto m = bn::sample(abc_chain(), 10000, 12);
    const auto r = discovery::pc_learn_detailed(m);
    EXPECT_TRUE(same_skeleton(r.dag, abc_chain().dag()));
    ASSERT_TRUE(r.sepsets.count({0, 2}));
    EXPECT_EQ(r.sepsets.at({0, 2}), (std::vector<std::size_t>{1}));
    // No collider: both orientations come from the column order.
    EXPECT_EQ(r.order_forced.size(), 2u);
}

TEST(Pc, OrientsCollider) {
    // A, B fair coins; C = A OR B with 5% flips.
    Rng rng(33);
    std::vector<std::uint8_t> a(10000), b(10000), c(10000);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = rng.bernoulli(0.5);
        b[i] = rng.bernoulli(0.5);
        c[i] = static_cast<std::uint8_t>((a[i] | b[i]) ^ static_cast<std::uint8_t>(rng.bernoulli(0.05)));
    }
    const auto r = discovery::pc_learn_detailed(data::EventMatrix::from_columns({"A", "B", "C"}, {a, b, c}));
    EXPECT_EQ(r.dag.edges(), (std::vector<Edge>{{0, 2}, {1, 2}}));
    EXPECT_TRUE(r.order_forced.empty());
}

TEST(Pc, XorColliderIsInvisibleToPairwiseTests) {
    // Every pair is marginally independent, so the skeleton search removes all
    // edges at level zero; faithfulness fails for this distribution.
    Rng rng(32);
    std::vector<std::uint8_t> a(10000), b(10000), c(10000);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = rng.bernoulli(0.5);
        b[i] = rng.bernoulli(0.5);
        c[i] = a[i] ^ b[i];
    }
    EXPECT_EQ(discovery::pc_learn(data::EventMatrix::from_columns({"A", "B", "C"}, {a, b, c})).edge_count(), 0u);
}

TEST(Pc, FalseEdgeRateMatchesAlpha) {
    // Two independent columns: one marginal test, so a false edge appears at rate alpha.
    int edges = 0;
    const int reps = 400;
    for (int rep = 0; rep < reps; ++rep) {
        edges += static_cast<int>(
            discovery::pc_learn(independent_columns(2, 2000, derive_seed(17, "pc-null", rep))).edge_count());
    }
    EXPECT_GE(edges, 8);
    EXPECT_LE(edges, 35);
}

TEST(Pc, SkeletonInvariantUnderColumnPermutation) {
    const auto m = bn::sample(pipeline::preset_network("diamond"), 4000, 6);
    const auto base = discovery::pc_learn(m);
    std::vector<std::string> perm = m.columns();
    std::reverse(perm.begin(), perm.end());
    const auto other = discovery::pc_learn(m.select_columns(perm));
    for (std::size_t i = 0; i < base.size(); ++i) {
        for (std::size_t j = i + 1; j < base.size(); ++j) {
            const auto oi = other.index_of(base.label(i));
            const auto oj = other.index_of(base.label(j));
            EXPECT_EQ(base.adjacent(i, j), other.adjacent(oi, oj)) << base.label(i) << " " << base.label(j);
        }
    }
}

TEST(Pc, AlphaValidated) {
    discovery::PcOptions opt;
    opt.alpha = 1.5;
    EXPECT_THROW(discovery::pc_learn_detailed(independent_columns(2, 100, 1), opt), ValidationError);
}

// ---------------------------------------------------------------- LiNGAM

TEST(Lingam, SingleColumn) {
    discovery::NumericData d{{"x"}, Eigen::MatrixXd::Random(50, 1)};
    const auto r = discovery::lingam_learn(d);
    EXPECT_EQ(r.dag.size(), 1u);
    EXPECT_EQ(r.dag.edge_count(), 0u);
}

TEST(Lingam, UniformNoiseSem) {
    std::mt19937_64 engine(77);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const Eigen::Index n = 5000;
    Eigen::MatrixXd x(n, 2);
    for (Eigen::Index r = 0; r < n; ++r) {
        x(r, 0) = u(engine);
        x(r, 1) = 0.8 * x(r, 0) + u(engine);
    }
    const auto fwd = discovery::lingam_learn(discovery::NumericData{{"x1", "x2"}, x});
    EXPECT_EQ(fwd.causal_order, (std::vector<std::size_t>{0, 1}));
    EXPECT_EQ(fwd.dag.labeled_edges(), (std::vector<std::pair<std::string, std::string>>{{"x1", "x2"}}));
    // Same data, columns swapped: the order follows the data, not the column order.
    Eigen::MatrixXd swapped(n, 2);
    swapped.col(0) = x.col(1);
    swapped.col(1) = x.col(0);
    const auto rev = discovery::lingam_learn(discovery::NumericData{{"x2", "x1"}, swapped});
    EXPECT_EQ(rev.dag.labeled_edges(), (std::vector<std::pair<std::string, std::string>>{{"x1", "x2"}}));
}

TEST(Lingam, IndependentColumnsGiveNoEdges) {
    std::mt19937_64 engine(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::MatrixXd x(3000, 3);
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        for (Eigen::Index c = 0; c < 3; ++c) x(r, c) = u(engine);
    }
    EXPECT_EQ(discovery::lingam_learn(discovery::NumericData{{"a", "b", "c"}, x}).dag.edge_count(), 0u);
}

TEST(Lingam, ConstantColumnIsExogenousAndIsolated) {
    std::mt19937_64 engine(9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::MatrixXd x(1000, 3);
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        x(r, 0) = u(engine);
        x(r, 1) = 3.0;
        x(r, 2) = x(r, 0) + 0.5 * u(engine);
    }
    const auto r = discovery::lingam_learn(discovery::NumericData{{"a", "k", "b"}, x});
    EXPECT_EQ(r.causal_order.front(), 1u);
    EXPECT_TRUE(r.dag.parents(1).empty());
    EXPECT_TRUE(r.dag.children(1).empty());
}

TEST(Lingam, RejectsNonFinite) {
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(4, 2);
    x(1, 1) = std::nan("");
    EXPECT_THROW(discovery::lingam_learn(discovery::NumericData{{"a", "b"}, x}), ValidationError);
}

// ---------------------------------------------------------------- NOTEARS numerics

TEST(Notears, AcyclicityOfEmptyAndTriangular) {
    EXPECT_EQ(discovery::acyclicity_h(Eigen::MatrixXd::Zero(4, 4)).value, 0.0);
    EXPECT_TRUE(discovery::acyclicity_h(Eigen::MatrixXd::Zero(4, 4)).gradient.isZero());
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(4, 4);
    w(0, 1) = 1.3;
    w(0, 3) = -0.4;
    w(1, 2) = 2.0;
    w(2, 3) = 0.7;
    EXPECT_NEAR(discovery::acyclicity_h(w).value, 0.0, 1e-12);
}

TEST(Notears, AcyclicityOfUnitTwoCycle) {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(2, 2);
    w(0, 1) = w(1, 0) = 1.0;
    const double expected = std::exp(1.0) + std::exp(-1.0) - 2.0;
    EXPECT_NEAR(discovery::acyclicity_h(w).value, expected, 1e-9);
    EXPECT_NEAR(discovery::acyclicity_h(w).value, 1.086161, 1e-6);
}

TEST(Notears, GradientMatchesFiniteDifferences) {
    std::mt19937_64 engine(2024);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double step = 1e-5;
    for (int rep = 0; rep < 20; ++rep) {
        Eigen::MatrixXd w(5, 5);
        for (Eigen::Index i = 0; i < 5; ++i) {
            for (Eigen::Index j = 0; j < 5; ++j) w(i, j) = i == j ? 0.0 : u(engine);
        }
        const auto analytic = discovery::acyclicity_h(w).gradient;
        for (Eigen::Index i = 0; i < 5; ++i) {
            for (Eigen::Index j = 0; j < 5; ++j) {
                Eigen::MatrixXd plus = w, minus = w;
                plus(i, j) += step;
                minus(i, j) -= step;
                const double fd = (discovery::acyclicity_h(plus).value - discovery::acyclicity_h(minus).value) /
                                  (2 * step);
                ASSERT_NEAR(analytic(i, j), fd, 1e-6) << "rep " << rep << " (" << i << "," << j << ")";
            }
        }
    }
}

TEST(Notears, MatrixExponentialMatchesEigen) {
    std::mt19937_64 engine(7);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int rep = 0; rep < 20; ++rep) {
        Eigen::MatrixXd a(6, 6);
        for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = u(engine);
        const Eigen::MatrixXd ours = discovery::matrix_exponential(a);
        const Eigen::MatrixXd ref = a.exp();
        EXPECT_LE((ours - ref).norm() / ref.norm(), 1e-11);
    }
}

TEST(Notears, AcyclicityZeroIffAcyclic) {
    Rng rng(99);
    for (int rep = 0; rep < 200; ++rep) {
        Eigen::MatrixXd w = Eigen::MatrixXd::Zero(5, 5);
        std::vector<Edge> edges;
        for (std::size_t i = 0; i < 5; ++i) {
            for (std::size_t j = 0; j < 5; ++j) {
                if (i != j && rng.bernoulli(0.25)) {
                    w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 0.2 + rng.uniform();
                    edges.push_back({i, j});
                }
            }
        }
        const double h = discovery::acyclicity_h(w).value;
        EXPECT_GE(h, -1e-12);
        if (bn::is_acyclic(5, edges)) {
            EXPECT_NEAR(h, 0.0, 1e-10);
        } else {
            EXPECT_GT(h, 1e-6);
        }
    }
}

// Frozen from a scipy L-BFGS-B implementation of the same augmented
// Lagrangian on the population moment of x1 = e1, x2 = 0.8 x1 + e2,
// x3 = -0.7 x2 + e3 with noise variances (1, 0.5, 0.3).
TEST(Notears, MatchesReferenceSolver) {
    Eigen::Matrix3d s;
    s << 1.0, 0.8, -0.56, 0.8, 1.14, -0.798, -0.56, -0.798, 0.8586;
    discovery::NotearsOptions opt;
    opt.omega = 0.0;
    opt.lambda = 0.0;
    auto r = discovery::notears_from_moment(s, {"x1", "x2", "x3"}, opt);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.raw_weights(1, 0), 0.6972796136, 2e-3);
    EXPECT_NEAR(r.raw_weights(2, 1), -0.9284105854, 2e-3);
    EXPECT_NEAR(r.raw_weights(2, 0), -0.0043411185, 2e-3);
    opt.lambda = 0.05;
    r = discovery::notears_from_moment(s, {"x1", "x2", "x3"}, opt);
    EXPECT_NEAR(r.raw_weights(1, 0), 0.6570022477, 2e-4);
    EXPECT_NEAR(r.raw_weights(2, 1), -0.8693968765, 2e-4);
    EXPECT_NEAR(r.raw_weights(2, 0), 0.0, 2e-4);
    opt.omega = 0.3;
    r = discovery::notears_from_moment(s, {"x1", "x2", "x3"}, opt);
    EXPECT_EQ(r.dag.labeled_edges(), (std::vector<std::pair<std::string, std::string>>{{"x2", "x1"}, {"x3", "x2"}}));
}

TEST(Notears, ConvergedRunsReachTolerance) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto m = bn::sample(pipeline::preset_network("diamond"), 2000, seed);
        for (double lambda : {0.001, 0.01, 0.1}) {
            discovery::NotearsOptions opt;
            opt.lambda = lambda;
            const auto r = discovery::notears_learn(m, opt);
            EXPECT_TRUE(r.converged);
            EXPECT_LE(r.h, 1e-8);
        }
    }
}

TEST(Notears, ThresholdRaisedUntilAcyclic) {
    // Stop the penalty schedule immediately so both directions survive.
    Eigen::Matrix2d s;
    s << 1.0, 0.9, 0.9, 1.3;
    discovery::NotearsOptions opt;
    opt.lambda = 0.0;
    opt.omega = 0.01;
    opt.rho_max = 1.0;
    opt.max_outer_iterations = 1;
    const auto r = discovery::notears_from_moment(s, {"a", "b"}, opt);
    EXPECT_FALSE(r.converged);
    EXPECT_GT(r.omega_used, opt.omega);
    EXPECT_EQ(r.dag.edge_count(), 1u);
}

TEST(Notears, RejectsNonFiniteData) {
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(3, 2);
    x(0, 0) = std::numeric_limits<double>::infinity();
    EXPECT_THROW(discovery::notears_learn(discovery::NumericData{{"a", "b"}, x}), ValidationError);
}

// ---------------------------------------------------------------- stability selection

TEST(Stability, LogGrid) {
    const auto g = discovery::log_grid(1e-3, 1.0, 16);
    ASSERT_EQ(g.size(), 16u);
    EXPECT_EQ(g.front(), 1e-3);
    EXPECT_EQ(g.back(), 1.0);
    for (std::size_t i = 1; i < g.size(); ++i) EXPECT_NEAR(g[i] / g[i - 1], std::pow(1000.0, 1.0 / 15.0), 1e-12);
    EXPECT_THROW(discovery::log_grid(0.0, 1.0, 4), ValidationError);
    EXPECT_THROW(discovery::log_grid(1.0, 0.1, 4), ValidationError);
}

TEST(Stability, SingleCellDegeneratesToNotears) {
    const auto m = bn::sample(pipeline::preset_network("diamond"), 2000, 8);
    discovery::StabilityOptions opt;
    opt.lambda_grid = {0.02};
    opt.n_resamples = 1;
    opt.subsample_fraction = 1.0;
    const auto rep = discovery::stability_select(m, opt);
    discovery::NotearsOptions nt;
    nt.lambda = 0.02;
    EXPECT_EQ(rep.dag, discovery::notears_learn(m, nt).dag);
}

TEST(Stability, IndependentColumnsGiveNoStableEdges) {
    const auto m = independent_columns(5, 2000, 4);
    discovery::StabilityOptions opt;
    opt.seed = 4;
    const auto rep = discovery::stability_select(m, opt);
    EXPECT_TRUE(rep.stable_edges.empty());
    for (const auto& f : rep.edge_frequencies) {
        EXPECT_GE(f.minCoeff(), 0.0);
        EXPECT_LE(f.maxCoeff(), 1.0);
    }
}

TEST(Stability, GaussianChainRecovered) {
    int exact = 0;
    const std::vector<Edge> chain{{0, 1}, {1, 2}, {2, 3}, {3, 4}};
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        discovery::StabilityOptions opt;
        opt.seed = seed;
        exact += discovery::stability_select(gaussian_chain(5, 2000, seed), opt).dag.edges() == chain;
    }
    EXPECT_GE(exact, 9);
}

TEST(Stability, ThreadCountDoesNotChangeResult) {
    const auto m = bn::sample(pipeline::preset_network("fork"), 1500, 2);
    discovery::StabilityOptions opt;
    opt.lambda_grid = discovery::log_grid(1e-3, 1.0, 6);
    opt.n_resamples = 8;
    opt.seed = 5;
    const auto serial = discovery::stability_select(m, opt);
    opt.jobs = 3;
    EXPECT_EQ(serial.to_json(), discovery::stability_select(m, opt).to_json());
}

TEST(Learners, ParseAndRun) {
    EXPECT_EQ(discovery::parse_algorithm("notears-stability"), discovery::Algorithm::NotearsStability);
    EXPECT_THROW(discovery::parse_algorithm("ges"), ValidationError);
    const auto m = bn::sample(abc_chain(), 3000, 1);
    for (auto a : {discovery::Algorithm::Hc, discovery::Algorithm::Pc, discovery::Algorithm::Lingam,
                   discovery::Algorithm::Notears}) {
        const auto g = discovery::make_learner(a)(m, 1);
        EXPECT_EQ(g.nodes(), m.columns()) << discovery::algorithm_name(a);
    }
}
