#pragma once

#include <random>
#include <string>
#include <vector>

#include "strana/model.hpp"

namespace strana {

/// Knobs for the seeded random-model generator (property testing at scale).
struct GenerateOptions {
  int constraints = 14;       // algebraic constraints (differential ones extra)
  int unknowns = 10;
  int knowns = 6;
  int differential_pairs = 1;  // adds one d-constraint and one derivative var each
  double extra_edge_prob = 0.25;
  double faultable_frac = 0.5;
  double unsolvable_prob = 0.0;
  int max_weight = 20;
  double noise_prob = 0.25;
};

/// Deterministic model from a seed: same seed, same model, byte for byte.
inline StructuralModel generate_model(std::uint64_t seed,
                                      const GenerateOptions& opt = {}) {
  std::mt19937_64 rng(seed);
  auto chance = [&](double p) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
  };
  auto uniform = [&](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };
  auto pad = [](const char* prefix, int i) {
    std::string s = std::to_string(i);
    while (s.size() < 3) s.insert(s.begin(), '0');
    return std::string(prefix) + s;
  };

  std::vector<Variable> variables;
  std::vector<Constraint> constraints;
  std::vector<ModelEdge> edges;

  for (int i = 0; i < opt.unknowns; ++i) variables.push_back({pad("x", i), false, {}});
  for (int i = 0; i < opt.knowns; ++i) {
    Variable v{pad("u", i), true, {}};
    if (chance(opt.noise_prob))
      v.noise_variance = uniform(1, 100) / 10.0;
    variables.push_back(std::move(v));
  }
  const int nu = opt.unknowns;

  // Differential pairs: a fresh derivative variable per pair.
  for (int i = 0; i < opt.differential_pairs && nu > 0; ++i) {
    int x = uniform(0, nu - 1);
    int xd = static_cast<int>(variables.size());
    variables.push_back({pad("xd", i), false, {}});
    int c = static_cast<int>(constraints.size());
    constraints.push_back({pad("d", i), ConstraintKind::differential, false, 1});
    edges.push_back({c, x, 0, true, DynamicRole::integral});
    edges.push_back({c, xd, 0, true, DynamicRole::derivative});
    edges[edges.size() - 2].weight = 100;
    edges[edges.size() - 1].weight = 200;
  }
  const int total_vars = static_cast<int>(variables.size());

  auto add_edge = [&](int c, int v) {
    for (const auto& e : edges)
      if (e.constraint == c && e.variable == v) return false;
    ModelEdge e;
    e.constraint = c;
    e.variable = v;
    e.weight = uniform(1, opt.max_weight);
    e.solvable = !chance(opt.unsolvable_prob);
    edges.push_back(e);
    return true;
  };

  for (int i = 0; i < opt.constraints; ++i) {
    int c = static_cast<int>(constraints.size());
    Constraint con{pad("c", i),
                   chance(0.4) ? ConstraintKind::algebraic_nonlinear
                               : ConstraintKind::algebraic_linear,
                   chance(opt.faultable_frac), 1 + uniform(0, 4)};
    constraints.push_back(std::move(con));
    int arity = uniform(1, std::min(4, total_vars));
    for (int a = 0; a < arity; ++a) add_edge(c, uniform(0, total_vars - 1));
    while (chance(opt.extra_edge_prob)) add_edge(c, uniform(0, total_vars - 1));
  }

  // Every variable must appear in at least one edge; hook leftovers into
  // random algebraic constraints (never differential ones, whose edge pair
  // is fixed).
  std::vector<char> used(total_vars, 0);
  for (const auto& e : edges) used[e.variable] = 1;
  std::vector<int> algebraic;
  for (int c = 0; c < static_cast<int>(constraints.size()); ++c)
    if (constraints[c].kind != ConstraintKind::differential) algebraic.push_back(c);
  for (int v = 0; v < total_vars; ++v) {
    if (used[v] || algebraic.empty()) continue;
    for (int tries = 0; tries < 64; ++tries)
      if (add_edge(algebraic[uniform(0, static_cast<int>(algebraic.size()) - 1)], v))
        break;
  }

  return StructuralModel::build(std::move(variables), std::move(constraints),
                                std::move(edges));
}

}  // namespace strana
