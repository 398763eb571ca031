#include "strana/mso.hpp"

#include <random>
#include <set>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "strana/generate.hpp"
#include "strana/model_io.hpp"

namespace {

using namespace strana;

BipartiteGraph over_part(const BipartiteGraph& g) {
  auto d = dm_decompose(g);
  std::vector<int> locals;
  for (int root : d.over.constraints) locals.push_back(g.constraint_local(root));
  return g.induced(locals);
}

TEST(EnumerateMsos, RedundancyOneIsTheWholeGraph) {
  auto g = BipartiteGraph::build(2, 1, {false},
                                 {{0, 0, 1, true, DynamicRole::none},
                                  {1, 0, 1, true, DynamicRole::none}});
  auto msos = enumerate_msos(g);
  ASSERT_EQ(msos.size(), 1u);
  EXPECT_EQ(msos[0].constraints, (std::vector<int>{0, 1}));
  EXPECT_EQ(msos[0].variables, (std::vector<int>{0}));
}

TEST(EnumerateMsos, TwoIndependentComponents) {
  auto g = BipartiteGraph::build(4, 2, {false, false},
                                 {{0, 0, 1, true, DynamicRole::none},
                                  {1, 0, 1, true, DynamicRole::none},
                                  {2, 1, 1, true, DynamicRole::none},
                                  {3, 1, 1, true, DynamicRole::none}});
  auto msos = enumerate_msos(g);
  ASSERT_EQ(msos.size(), 2u);
  EXPECT_EQ(msos[0].constraints, (std::vector<int>{0, 1}));
  EXPECT_EQ(msos[1].constraints, (std::vector<int>{2, 3}));
}

TEST(EnumerateMsos, EmptyWhenNoRedundancy) {
  auto g = BipartiteGraph::build(1, 1, {false}, {{0, 0, 1, true, DynamicRole::none}});
  EXPECT_TRUE(enumerate_msos(g).empty());
}

TEST(EnumerateMsos, MatchesSubsetOracle) {
  std::mt19937_64 rng(201);
  int nonempty = 0;
  for (int iter = 0; iter < 250; ++iter) {
    auto g0 = strana_test::random_graph(rng, 7, 5, 0.45, iter % 5 == 0 ? 0.15 : 0.0);
    auto gp = over_part(g0);
    if (gp.num_constraints() > 7 || gp.num_constraints() == 0) continue;
    auto got = enumerate_msos(gp);
    auto want_local = strana_test::oracle_msos(gp);
    std::vector<std::vector<int>> want;
    for (auto& subset : want_local) {
      std::vector<int> roots;
      for (int c : subset) roots.push_back(gp.constraint_root(c));
      std::sort(roots.begin(), roots.end());
      want.push_back(std::move(roots));
    }
    std::sort(want.begin(), want.end());
    std::vector<std::vector<int>> got_sets;
    for (const auto& mso : got) got_sets.push_back(mso.constraints);
    EXPECT_EQ(got_sets, want) << "iter " << iter;
    nonempty += got.empty() ? 0 : 1;
  }
  EXPECT_GT(nonempty, 30);  // the generator must actually exercise redundancy
}

TEST(EnumerateMsos, EveryMsoMinusAnyConstraintHasPerfectMatching) {
  std::mt19937_64 rng(207);
  for (int iter = 0; iter < 60; ++iter) {
    auto gp = over_part(strana_test::random_graph(rng, 7, 5, 0.5));
    if (gp.num_constraints() == 0) continue;
    for (const auto& mso : enumerate_msos(gp)) {
      for (int skip : mso.constraints) {
        std::vector<int> locals;
        for (int c : mso.constraints)
          if (c != skip) locals.push_back(gp.constraint_local(c));
        auto sub = gp.induced(locals);
        auto cmatch = strana_test::oracle_max_matching(sub, strana_test::all_constraints(sub));
        int matched = 0;
        for (int v : cmatch) matched += v != -1 ? 1 : 0;
        EXPECT_EQ(matched, sub.num_constraints());
        EXPECT_EQ(matched, sub.num_unknowns());
      }
    }
  }
}

TEST(EnumerateMsos, FullyConnectedRedundancyPatterns) {
  // K_{n+r, n}: every (n+1)-subset of constraints is an MSO.
  for (int n = 1; n <= 3; ++n) {
    for (int r = 1; r <= 3; ++r) {
      std::vector<GraphEdge> edges;
      for (int c = 0; c < n + r; ++c)
        for (int v = 0; v < n; ++v) edges.push_back({c, v, 1, true, DynamicRole::none});
      auto g = BipartiteGraph::build(n + r, n, std::vector<bool>(n, false),
                                     std::move(edges));
      auto got = enumerate_msos(g);
      auto want = strana_test::oracle_msos(g);
      EXPECT_EQ(got.size(), want.size()) << "n=" << n << " r=" << r;
      // C(n+r, n+1)
      long long expect = 1;
      for (int i = 0; i < n + 1; ++i) expect = expect * (n + r - i) / (i + 1);
      EXPECT_EQ(static_cast<long long>(got.size()), expect);
    }
  }
}

TEST(EnumerateMsos, InvariantUnderInputPermutation) {
  const char* a =
      "structural-model v1\nvariable x1\nvariable x2\n"
      "constraint e1 kind=linear\nconstraint e2 kind=linear\nconstraint e3 kind=linear\n"
      "edge e1 x1 weight=1\nedge e2 x1 weight=1\nedge e2 x2 weight=1\n"
      "edge e3 x2 weight=1\n";
  const char* b =
      "structural-model v1\nvariable x2\nvariable x1\n"
      "constraint e3 kind=linear\nconstraint e1 kind=linear\nconstraint e2 kind=linear\n"
      "edge e3 x2 weight=1\nedge e2 x2 weight=1\nedge e2 x1 weight=1\n"
      "edge e1 x1 weight=1\n";
  auto ma = parse_model(a);
  auto mb = parse_model(b);
  auto list_ids = [](const StructuralModel& m) {
    auto g = BipartiteGraph::from_model(m);
    std::set<std::vector<std::string>> sets;
    for (const auto& mso : enumerate_msos(over_part(g))) {
      std::vector<std::string> ids;
      for (int c : mso.constraints) ids.push_back(m.constraint(c).id);
      std::sort(ids.begin(), ids.end());
      sets.insert(ids);
    }
    return sets;
  };
  EXPECT_EQ(list_ids(ma), list_ids(mb));
}

TEST(EnumerateMsos, UncoverableUnknownExcludesSets) {
  // c1 touches y only through a non-solvable edge; no MSO may contain c1
  // unless y is determined, which nothing can do.
  auto g = BipartiteGraph::build(3, 2, {false, false},
                                 {{0, 0, 1, true, DynamicRole::none},
                                  {0, 1, 1, false, DynamicRole::none},
                                  {1, 0, 1, true, DynamicRole::none},
                                  {2, 0, 1, true, DynamicRole::none}});
  auto msos = enumerate_msos(g);
  auto want = strana_test::oracle_msos(g);
  ASSERT_EQ(msos.size(), 1u);
  EXPECT_EQ(want.size(), 1u);
  EXPECT_EQ(msos[0].constraints, (std::vector<int>{1, 2}));
}

TEST(EnumerateMsos, CapIsAReportedError) {
  // K_{6,3}: C(6,4) = 15 MSOs.
  std::vector<GraphEdge> edges;
  for (int c = 0; c < 6; ++c)
    for (int v = 0; v < 3; ++v) edges.push_back({c, v, 1, true, DynamicRole::none});
  auto g = BipartiteGraph::build(6, 3, {false, false, false}, std::move(edges));
  MsoOptions opt;
  opt.cap = 10;
  EXPECT_THROW(enumerate_msos(g, opt), MsoCapExceeded);
  opt.cap = 15;
  EXPECT_EQ(enumerate_msos(g, opt).size(), 15u);
}

TEST(EnumerateMsos, ParallelJobsGiveIdenticalResults) {
  std::mt19937_64 rng(209);
  for (int iter = 0; iter < 25; ++iter) {
    auto gp = over_part(strana_test::random_graph(rng, 8, 5, 0.5));
    if (gp.num_constraints() == 0) continue;
    MsoOptions seq, par;
    par.jobs = 4;
    EXPECT_EQ(enumerate_msos(gp, seq), enumerate_msos(gp, par));
  }
}

TEST(FilterFaultable, KeepsOnlyFaultIntersectingSets) {
  auto m = parse_model(
      "structural-model v1\nvariable x1\nvariable x2\n"
      "constraint e1 kind=linear faultable\nconstraint e2 kind=linear\n"
      "constraint e3 kind=linear\nconstraint e4 kind=linear\n"
      "edge e1 x1 weight=1\nedge e2 x1 weight=1\n"
      "edge e3 x2 weight=1\nedge e4 x2 weight=1\n");
  auto g = BipartiteGraph::from_model(m);
  auto msos = enumerate_msos(over_part(g));
  ASSERT_EQ(msos.size(), 2u);
  auto kept = filter_faultable(msos, m);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].constraints,
            (std::vector<int>{m.constraint_index("e1"), m.constraint_index("e2")}));

  // All faultable -> unchanged.
  auto all_model = parse_model(
      "structural-model v1\nvariable x1\n"
      "constraint e1 kind=linear faultable\nconstraint e2 kind=linear faultable\n"
      "edge e1 x1 weight=1\nedge e2 x1 weight=1\n");
  auto ag = BipartiteGraph::from_model(all_model);
  auto amsos = enumerate_msos(over_part(ag));
  EXPECT_EQ(filter_faultable(amsos, all_model), amsos);
}

TEST(RemainingGraph, DropsMatchedAndResidualConstraints) {
  auto m = strana_test::gps_position_model();
  auto g = BipartiteGraph::from_model(m);
  auto elim = weighted_elimination({&g, Causality::differential});
  auto rem = remaining_graph(g, elim);
  EXPECT_EQ(rem.num_constraints(), 0);
}

}  // namespace
