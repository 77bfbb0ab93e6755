#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "eventchron/chronology.hpp"
#include "eventchron/error.hpp"
#include "eventchron/pipeline.hpp"
#include "eventchron/rng.hpp"
#include "fixtures.hpp"

using namespace eventchron;
using bn::Dag;
using bn::Edge;
using causal::CausalRelationTable;
using causal::EffectEstimate;

namespace {

EffectEstimate row(const std::string& x, const std::string& y, double value, bool validated = true) {
    EffectEstimate e;
    e.treatment = x;
    e.outcome = y;
    e.value = value;
    e.validated = validated;
    return e;
}

void expect_forest(const chronology::ChronologyTree& t) {
    for (std::size_t v = 0; v < t.tree.size(); ++v) ASSERT_LE(t.tree.parents(v).size(), 1u);
    ASSERT_FALSE(bn::find_cycle(t.tree.size(), t.tree.edges()).has_value());
    ASSERT_EQ(t.level.size(), t.tree.size());
}

}  // namespace

TEST(StrongRelations, LargestValidatedPerOutcome) {
    const Dag g({"a", "b", "c"}, std::vector<Edge>{{0, 2}, {1, 2}, {0, 1}});
    CausalRelationTable t;
    t.rows = {row("a", "c", 0.3), row("b", "c", 0.5), row("a", "b", 0.9, false)};
    const auto strong = chronology::strong_causal_relations(t, g);
    ASSERT_EQ(strong.size(), 1u);
    EXPECT_EQ(strong[0].treatment, "b");
}

TEST(StrongRelations, TiesGoToLowerLevelThenLabel) {
    // a is a root, b sits at level 1.
    const Dag g({"b", "a", "c", "d"}, std::vector<Edge>{{1, 0}, {0, 2}, {1, 2}, {1, 3}, {2, 3}});
    CausalRelationTable t;
    t.rows = {row("b", "c", 0.4), row("a", "c", 0.4)};
    EXPECT_EQ(chronology::strong_causal_relations(t, g)[0].treatment, "a");

    const Dag flat({"z", "y", "x"}, std::vector<Edge>{{0, 2}, {1, 2}});
    t.rows = {row("z", "x", 0.2), row("y", "x", 0.2)};
    EXPECT_EQ(chronology::strong_causal_relations(t, flat)[0].treatment, "y");
}

TEST(Chronology, BuildsForestWithIsolatedNodes) {
    const Dag g({"a", "b", "c", "d"}, std::vector<Edge>{{0, 1}, {0, 2}, {1, 2}});
    const auto tree = chronology::build_chronology(g, {row("a", "b", 0.5), row("b", "c", 0.4)});
    expect_forest(tree);
    EXPECT_EQ(tree.tree.edge_count(), 2u);
    EXPECT_EQ(tree.isolated, (std::vector<std::string>{"d"}));
    EXPECT_EQ(tree.level_map().at("c"), 2u);
    const auto j = nlohmann::json::parse(tree.to_json());
    EXPECT_EQ(j["nodes"].size(), 4u);
    EXPECT_NE(tree.to_dot().find("rank"), std::string::npos);
}

TEST(Chronology, NonEdgeRejected) {
    const Dag g({"a", "b"}, std::vector<Edge>{{0, 1}});
    EXPECT_THROW(chronology::build_chronology(g, {row("b", "a", 0.5)}), ValidationError);
}

TEST(Chronology, RandomGraphsGiveForests) {
    Rng rng(31);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t n = 2 + rep % 9;
        std::vector<std::string> labels;
        for (std::size_t i = 0; i < n; ++i) labels.push_back("e" + std::to_string(i));
        std::vector<Edge> edges;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                if (rng.bernoulli(0.4)) edges.push_back({i, j});
            }
        }
        const Dag g(labels, edges);
        CausalRelationTable t;
        for (const auto& [x, y] : g.labeled_edges()) {
            t.rows.push_back(row(x, y, rng.uniform() - 0.3, true));
            t.rows.back().validated = t.rows.back().value > 0;
        }
        const auto tree = chronology::build_chronology(g, chronology::strong_causal_relations(t, g));
        expect_forest(tree);
        for (const auto& e : tree.tree.edges()) ASSERT_TRUE(g.has_edge(e.from, e.to));
    }
}

TEST(Baseline, NdhdPairOrientation) {
    const auto r = chronology::deterministic_chronology(fixtures::ndhd_pair());
    ASSERT_EQ(r.tests.size(), 1u);
    EXPECT_TRUE(r.tests[0].dependent);
    EXPECT_EQ(r.tests[0].table.n01, 144u);
    EXPECT_EQ(r.tests[0].table.n10, 39u);
    EXPECT_EQ(r.dag.labeled_edges(),
              (std::vector<std::pair<std::string, std::string>>{{"ndhD_116785", "ndhD_116494"}}));
    EXPECT_TRUE(r.isolated.empty());
}

TEST(Baseline, EqualSoloCountsMerge) {
    std::ostringstream csv;
    csv << "a,b,c\n";
    fixtures::append_rows(csv, "True,True,False", 40);
    fixtures::append_rows(csv, "False,False,True", 60);
    fixtures::append_rows(csv, "True,False,True", 5);
    fixtures::append_rows(csv, "False,True,False", 5);
    fixtures::append_rows(csv, "False,False,False", 10);
    std::istringstream in(csv.str());
    const auto r = chronology::deterministic_chronology(data::parse_reads(in));
    const auto j = nlohmann::json::parse(r.to_json());
    ASSERT_EQ(j["simultaneity_groups"].size(), 1u);
    EXPECT_EQ(j["simultaneity_groups"][0], nlohmann::json({"a", "b"}));
    EXPECT_EQ(r.dag.nodes(), (std::vector<std::string>{"a+b", "c"}));
}

TEST(Baseline, IndependentEventIsIsolated) {
    Rng rng(2);
    std::vector<std::uint8_t> a(600), b(600), c(600);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = rng.bernoulli(0.5);
        b[i] = rng.bernoulli(0.1) ? !a[i] : a[i];
        c[i] = rng.bernoulli(0.5);
    }
    const auto r =
        chronology::deterministic_chronology(data::EventMatrix::from_columns({"a", "b", "c"}, {a, b, c}));
    EXPECT_EQ(r.isolated, (std::vector<std::string>{"c"}));
    EXPECT_EQ(r.dag.edge_count(), 1u);
}

TEST(Baseline, SingleColumnRejected) {
    const auto m = data::EventMatrix::from_columns({"a"}, {{0, 1}});
    EXPECT_THROW(chronology::deterministic_chronology(m), ValidationError);
}

TEST(CompareModels, TruthBeatsEmptyAndScoresSorted) {
    const auto truth = pipeline::preset_network("chain");
    const auto data = bn::sample(truth, 2000, 8);
    const auto scores = chronology::compare_models(
        {{"empty", Dag::empty(truth.dag().nodes())}, {"truth", truth.dag()}}, data);
    ASSERT_EQ(scores.size(), 2u);
    EXPECT_EQ(scores[0].name, "truth");
    EXPECT_GT(scores[0].bic, scores[1].bic);
    EXPECT_GT(scores[0].log_likelihood, scores[1].log_likelihood);
    const auto csv = chronology::scores_csv(scores);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "model,bic,log_likelihood,edges");
}

TEST(CompareModels, ColumnMismatchRejected) {
    const auto data = bn::sample(fixtures::two_node_chain(), 100, 1);
    EXPECT_THROW(chronology::compare_models({{"x", Dag::empty({"A", "C"})}}, data), ValidationError);
}

TEST(Falsify, CompleteGraphIsNotFalsifiable) {
    const Dag g({"A", "B", "C"}, std::vector<Edge>{{0, 1}, {0, 2}, {1, 2}});
    const auto data = bn::sample(pipeline::preset_network("collider"), 500, 2);
    const auto v = chronology::falsify(g, data);
    EXPECT_EQ(v.statements, 0u);
    EXPECT_FALSE(v.falsifiable);
    EXPECT_FALSE(v.falsified);
}

TEST(Falsify, TrueChainSurvives) {
    const auto truth = pipeline::preset_network("chain");
    const auto data = bn::sample(truth, 3000, 12);
    chronology::FalsifyOptions opt;
    opt.seed = 1;
    const auto good = chronology::falsify(truth.dag(), data, opt);
    EXPECT_TRUE(good.falsifiable);
    EXPECT_FALSE(good.falsified);
    EXPECT_EQ(good.statements, 6u);
    EXPECT_EQ(good.baseline.size(), opt.n_permutations);
    EXPECT_EQ(chronology::falsify(truth.dag(), data, opt).to_json(), good.to_json());

    // X1 -> X2 <- X3 plus the rest of the chain: more statements fail, but it
    // still beats most label permutations of itself, so it is rarely falsified.
    auto edges = truth.dag().edges();
    for (auto& e : edges) {
        if (e.from == 1 && e.to == 2) e = {2, 1};
    }
    const auto bad = chronology::falsify(truth.dag().with_edges(edges), data, opt);
    EXPECT_GT(bad.v_given, good.v_given);
    EXPECT_EQ(bad.falsified, bad.p_value >= opt.alpha_f);
}

TEST(Falsify, AllStatementsRejectedIsFalsified) {
    // The empty graph claims a and b independent; they are copies.
    const auto data = data::EventMatrix::from_columns({"a", "b"}, {{0, 1, 0, 1, 1, 0, 1, 0, 1, 1, 0, 0, 1, 0, 1, 1, 0, 1, 0, 0},
                                                                   {0, 1, 0, 1, 1, 0, 1, 0, 1, 1, 0, 0, 1, 0, 1, 1, 0, 1, 0, 0}});
    const auto v = chronology::falsify(Dag::empty({"a", "b"}), data);
    EXPECT_EQ(v.statements, 2u);
    EXPECT_EQ(v.v_given, 2u);
    EXPECT_TRUE(v.falsified);
}

TEST(Consensus, CountsAndThreshold) {
    const std::vector<std::string> n{"a", "b", "c"};
    const std::vector<Dag> dags{Dag(n, std::vector<Edge>{{0, 1}}), Dag(n, std::vector<Edge>{{1, 0}, {1, 2}}),
                                Dag(n, std::vector<Edge>{{0, 1}, {1, 2}})};
    const auto s = chronology::consensus_edges(dags);
    EXPECT_EQ(s.directed.at({"a", "b"}), 2u);
    EXPECT_EQ(s.undirected.at({"a", "b"}), 3u);
    using P = std::vector<std::pair<std::string, std::string>>;
    EXPECT_EQ(s.consensus_directed, (P{{"a", "b"}, {"b", "c"}}));
    EXPECT_EQ(s.consensus_undirected, (P{{"a", "b"}, {"b", "c"}}));
    EXPECT_EQ(chronology::consensus_edges(dags, 3).consensus_directed, P{});
}
