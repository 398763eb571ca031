#include "strana/matching.hpp"

#include <random>
#include <set>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "strana/generate.hpp"
#include "strana/model_io.hpp"

namespace {

using namespace strana;
using strana_test::cyclic_rank_graph;

TEST(Ranking, CompleteMatchingOnCyclicFixture) {
  auto g = cyclic_rank_graph();
  auto r = ranking_match({&g, Causality::mixed});
  EXPECT_TRUE(r.complete_on_unknowns);
  Matching expected;
  expected.pairs = {{0, 0}, {1, 1}, {2, 2}};
  expected.total_weight = 3;
  EXPECT_EQ(r.matching, expected);
}

TEST(Ranking, PureTwoCycleMatchesNothing) {
  // c1, c2 both over {x1, x2}: no constraint ever has exactly one unknown.
  auto g = BipartiteGraph::build(2, 2, {false, false},
                                 {{0, 0, 1, true, DynamicRole::none},
                                  {0, 1, 1, true, DynamicRole::none},
                                  {1, 0, 1, true, DynamicRole::none},
                                  {1, 1, 1, true, DynamicRole::none}});
  auto r = ranking_match({&g, Causality::mixed});
  EXPECT_EQ(r.matching.size(), 0);
  EXPECT_FALSE(r.complete_on_unknowns);
}

TEST(Ranking, ChainMatchesInRankOrder) {
  // c1(u known, x1), c2(x1, x2).
  auto g = BipartiteGraph::build(2, 3, {false, false, true},
                                 {{0, 0, 1, true, DynamicRole::none},
                                  {0, 2, 1, true, DynamicRole::none},
                                  {1, 0, 1, true, DynamicRole::none},
                                  {1, 1, 1, true, DynamicRole::none}});
  auto r = ranking_match({&g, Causality::mixed});
  ASSERT_EQ(r.steps.size(), 2u);
  EXPECT_EQ(r.steps[0].constraint, 0);
  EXPECT_EQ(r.steps[0].rank, 0);
  EXPECT_EQ(r.steps[1].constraint, 1);
  EXPECT_EQ(r.steps[1].rank, 1);
}

TEST(Ranking, RespectsCausality) {
  auto m = strana_test::gps_position_model();
  auto g = BipartiteGraph::from_model(m);
  // Under integral causality the derivative edge of d1 is inadmissible, but
  // the sensor equations still determine both unknowns.
  auto r = ranking_match({&g, Causality::integral});
  EXPECT_TRUE(r.complete_on_unknowns);
  for (const auto& p : r.matching.pairs)
    EXPECT_NE(p.constraint, m.constraint_index("d1"));
}

TEST(WeightedElimination, EmptyUnknownsMakesEveryConstraintACandidate) {
  auto g = BipartiteGraph::build(2, 1, {true},
                                 {{0, 0, 1, true, DynamicRole::none},
                                  {1, 0, 1, true, DynamicRole::none}});
  auto r = weighted_elimination({&g, Causality::differential});
  EXPECT_EQ(r.matching.size(), 0);
  EXPECT_EQ(r.residual_candidates, (std::vector<int>{0, 1}));
}

TEST(WeightedElimination, CheapestCandidateWinsAndLoserBecomesResidual) {
  // Two constraints compete for x1 with weights 5 and 3.
  auto g = BipartiteGraph::build(2, 1, {false},
                                 {{0, 0, 5, true, DynamicRole::none},
                                  {1, 0, 3, true, DynamicRole::none}});
  auto r = weighted_elimination({&g, Causality::differential});
  ASSERT_EQ(r.matching.size(), 1);
  EXPECT_EQ(r.matching.pairs[0].constraint, 1);
  EXPECT_EQ(r.matching.total_weight, 3);
  EXPECT_EQ(r.residual_candidates, std::vector<int>{0});
}

TEST(WeightedElimination, TieBreaksTowardLowestConstraintIndex) {
  auto g = BipartiteGraph::build(2, 1, {false},
                                 {{0, 0, 3, true, DynamicRole::none},
                                  {1, 0, 3, true, DynamicRole::none}});
  auto r = weighted_elimination({&g, Causality::differential});
  ASSERT_EQ(r.matching.size(), 1);
  EXPECT_EQ(r.matching.pairs[0].constraint, 0);
}

TEST(WeightedElimination, GpsFixtureFindsD1Residual) {
  auto m = strana_test::gps_position_model();
  auto g = BipartiteGraph::from_model(m);
  auto r = weighted_elimination({&g, Causality::differential});
  EXPECT_EQ(r.matching.size(), 2);
  EXPECT_EQ(r.matching.total_weight, 2);
  EXPECT_EQ(r.residual_candidates, std::vector<int>{m.constraint_index("d1")});
  // Replay: every matched constraint had exactly one unknown at match time.
  std::set<int> known;
  for (const auto& s : r.steps) {
    int lc = g.constraint_local(s.constraint);
    int unknowns = 0;
    for (int e : g.constraint_edges(lc)) {
      int v = g.edge(e).variable;
      if (!g.variable_known(v) && !known.count(g.variable_root(v))) ++unknowns;
    }
    EXPECT_EQ(unknowns, 1);
    known.insert(s.variable);
  }
}

TEST(WeightedElimination, OrientedResultIsAcyclicOnRandomModels) {
  for (std::uint64_t seed = 100; seed < 160; ++seed) {
    auto model = generate_model(seed);
    auto g = BipartiteGraph::from_model(model);
    auto r = weighted_elimination({&g, Causality::differential});
    auto d = orient(g, r.matching);
    for (const auto& comp : d.strongly_connected_components())
      EXPECT_EQ(comp.size(), 1u) << "seed " << seed;
    // Replay check as in the fixture test.
    std::set<int> known;
    for (const auto& s : r.steps) {
      int lc = g.constraint_local(s.constraint);
      int unknowns = 0;
      for (int e : g.constraint_edges(lc)) {
        int v = g.edge(e).variable;
        if (!g.variable_known(v) && !known.count(g.variable_root(v))) ++unknowns;
      }
      EXPECT_EQ(unknowns, 1) << "seed " << seed;
      known.insert(s.variable);
    }
  }
}

TEST(WeightedElimination, NeverMatchesInadmissibleEdges) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    GenerateOptions opt;
    opt.differential_pairs = 2;
    opt.unsolvable_prob = 0.15;
    auto model = generate_model(seed, opt);
    auto g = BipartiteGraph::from_model(model);
    auto r = weighted_elimination({&g, Causality::differential});
    for (const auto& p : r.matching.pairs) {
      int e = g.find_edge(g.constraint_local(p.constraint), g.variable_local(p.variable));
      ASSERT_GE(e, 0);
      EXPECT_TRUE(g.edge(e).solvable);
      EXPECT_NE(g.edge(e).role, DynamicRole::integral);
    }
  }
}

// ---------------------------------------------------------------------------

TEST(Hungarian, OneByOne) {
  auto g = BipartiteGraph::build(1, 1, {false}, {{0, 0, 7, true, DynamicRole::none}});
  auto m = hungarian_min_cost({&g, Causality::mixed});
  ASSERT_TRUE(m);
  EXPECT_EQ(m->total_weight, 7);
}

TEST(Hungarian, ForcedDiagonal) {
  auto g = BipartiteGraph::build(2, 2, {false, false},
                                 {{0, 0, 1, true, DynamicRole::none},
                                  {0, 1, 100, true, DynamicRole::none},
                                  {1, 0, 100, true, DynamicRole::none},
                                  {1, 1, 1, true, DynamicRole::none}});
  auto m = hungarian_min_cost({&g, Causality::mixed});
  ASSERT_TRUE(m);
  EXPECT_EQ(m->total_weight, 2);
  EXPECT_EQ(m->pairs, (std::vector<MatchedPair>{{0, 0}, {1, 1}}));
}

TEST(Hungarian, InfeasibleWhenNoPerfectMatching) {
  // Both constraints can only solve x1.
  auto g = BipartiteGraph::build(2, 2, {false, false},
                                 {{0, 0, 1, true, DynamicRole::none},
                                  {1, 0, 1, true, DynamicRole::none},
                                  {1, 1, 1, false, DynamicRole::none}});
  EXPECT_FALSE(hungarian_min_cost({&g, Causality::mixed}));
}

TEST(Hungarian, NonSquareThrows) {
  auto g = BipartiteGraph::build(2, 1, {false},
                                 {{0, 0, 1, true, DynamicRole::none},
                                  {1, 0, 1, true, DynamicRole::none}});
  EXPECT_THROW(hungarian_min_cost({&g, Causality::mixed}), std::invalid_argument);
}

BipartiteGraph random_square(std::mt19937_64& rng, int n, double density) {
  std::uniform_int_distribution<int> w(0, 100);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<GraphEdge> edges;
  for (int c = 0; c < n; ++c)
    for (int v = 0; v < n; ++v)
      if (u(rng) < density)
        edges.push_back({c, v, w(rng), true, DynamicRole::none});
  return BipartiteGraph::build(n, n, std::vector<bool>(n, false), std::move(edges));
}

TEST(Hungarian, MatchesFactorialOracle) {
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<int> ndist(1, 6);
  for (int iter = 0; iter < 200; ++iter) {
    int n = ndist(rng);
    auto g = random_square(rng, n, 0.8);
    auto got = hungarian_min_cost({&g, Causality::mixed});
    auto view = detail::make_assignment_view({&g, Causality::mixed});
    auto all = strana_test::oracle_all_assignments(view.cost, view.big);
    if (all.empty()) {
      EXPECT_FALSE(got);
    } else {
      ASSERT_TRUE(got);
      EXPECT_EQ(got->total_weight, all.front().first);
    }
  }
}

TEST(Murty, TwoByTwoCosts) {
  auto g = BipartiteGraph::build(2, 2, {false, false},
                                 {{0, 0, 1, true, DynamicRole::none},
                                  {0, 1, 100, true, DynamicRole::none},
                                  {1, 0, 100, true, DynamicRole::none},
                                  {1, 1, 1, true, DynamicRole::none}});
  GraphMurtyEnumerator murty({&g, Causality::mixed});
  auto m1 = murty.next();
  auto m2 = murty.next();
  auto m3 = murty.next();
  ASSERT_TRUE(m1);
  ASSERT_TRUE(m2);
  EXPECT_FALSE(m3);
  EXPECT_EQ(m1->total_weight, 2);
  EXPECT_EQ(m2->total_weight, 200);
}

TEST(Murty, UnitThreeByThree) {
  std::vector<GraphEdge> edges;
  for (int c = 0; c < 3; ++c)
    for (int v = 0; v < 3; ++v) edges.push_back({c, v, 1, true, DynamicRole::none});
  auto g = BipartiteGraph::build(3, 3, {false, false, false}, std::move(edges));
  GraphMurtyEnumerator murty({&g, Causality::mixed});
  std::set<std::vector<MatchedPair>> seen;
  for (int i = 0; i < 6; ++i) {
    auto m = murty.next();
    ASSERT_TRUE(m);
    EXPECT_EQ(m->total_weight, 3);
    EXPECT_TRUE(seen.insert(m->pairs).second) << "duplicate matching";
  }
  EXPECT_FALSE(murty.next());
}

TEST(Murty, MatchesFactorialOracle) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> ndist(1, 5);
  for (int iter = 0; iter < 150; ++iter) {
    int n = ndist(rng);
    auto g = random_square(rng, n, iter % 3 ? 0.9 : 0.6);
    auto view = detail::make_assignment_view({&g, Causality::mixed});
    auto want = strana_test::oracle_all_assignments(view.cost, view.big);
    GraphMurtyEnumerator murty({&g, Causality::mixed});
    std::vector<Cost> got_costs;
    std::set<std::vector<MatchedPair>> seen;
    while (auto m = murty.next()) {
      got_costs.push_back(m->total_weight);
      EXPECT_TRUE(seen.insert(m->pairs).second);
    }
    ASSERT_EQ(got_costs.size(), want.size()) << "n=" << n;
    for (size_t i = 0; i < got_costs.size(); ++i) {
      EXPECT_EQ(got_costs[i], want[i].first);
      if (i) EXPECT_LE(got_costs[i - 1], got_costs[i]);
    }
  }
}

TEST(Murty, FirstElementEqualsHungarian) {
  std::mt19937_64 rng(19);
  for (int iter = 0; iter < 60; ++iter) {
    auto g = random_square(rng, 1 + iter % 5, 0.8);
    auto h = hungarian_min_cost({&g, Causality::mixed});
    GraphMurtyEnumerator murty({&g, Causality::mixed});
    auto first = murty.next();
    ASSERT_EQ(h.has_value(), first.has_value());
    if (h) EXPECT_EQ(h->total_weight, first->total_weight);
  }
}

}  // namespace
