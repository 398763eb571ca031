#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "strana/assignment.hpp"
#include "strana/graph.hpp"

namespace strana {

/// Which dynamic operations the FDI runtime may perform. Under differential
/// causality integral-role edges are inadmissible in matchings; under
/// integral causality derivative-role edges are; mixed allows both.
enum class Causality { differential, integral, mixed };

inline const char* to_string(Causality c) {
  switch (c) {
    case Causality::differential: return "differential";
    case Causality::integral: return "integral";
    case Causality::mixed: return "mixed";
  }
  return "?";
}

inline std::optional<Causality> causality_from_string(std::string_view s) {
  if (s == "differential") return Causality::differential;
  if (s == "integral") return Causality::integral;
  if (s == "mixed") return Causality::mixed;
  return std::nullopt;
}

struct MatchingProblem {
  const BipartiteGraph* graph = nullptr;
  Causality causality = Causality::mixed;
};

inline bool admissible_edge(const GraphEdge& e, Causality causality) {
  if (!e.solvable) return false;
  if (e.role == DynamicRole::integral && causality == Causality::differential) return false;
  if (e.role == DynamicRole::derivative && causality == Causality::integral) return false;
  return true;
}

struct MatchStep {
  int constraint = -1;  // root indices
  int variable = -1;
  Cost weight = 0;
  int rank = 0;  // round in which the constraint became matchable
};

struct RankingResult {
  Matching matching;
  std::vector<MatchStep> steps;
  bool complete_on_unknowns = false;
};

/// Ranking: propagate an information front from the known variables. Each
/// round matches, in index order, every constraint that currently has exactly
/// one unknown variable left (counting all incident edges) through an
/// admissible edge. Not guaranteed maximal on cyclic graphs.
inline RankingResult ranking_match(const MatchingProblem& p) {
  const BipartiteGraph& g = *p.graph;
  std::vector<char> known(g.num_variables(), 0);
  for (int v = 0; v < g.num_variables(); ++v) known[v] = g.variable_known(v);
  std::vector<char> matched_c(g.num_constraints(), 0);

  auto sole_unknown = [&](int c) {
    int found = -1;
    for (int e : g.constraint_edges(c)) {
      int v = g.edge(e).variable;
      if (known[v]) continue;
      if (found != -1) return -2;
      found = v;
    }
    return found;
  };

  RankingResult r;
  std::vector<int> local_edges;
  for (int rank = 0;; ++rank) {
    std::vector<int> eligible;
    for (int c = 0; c < g.num_constraints(); ++c)
      if (!matched_c[c] && sole_unknown(c) >= 0) eligible.push_back(c);
    bool progressed = false;
    for (int c : eligible) {
      int v = sole_unknown(c);
      if (v < 0) continue;  // consumed earlier this round
      int e = g.find_edge(c, v);
      if (!admissible_edge(g.edge(e), p.causality)) continue;
      matched_c[c] = 1;
      known[v] = 1;
      local_edges.push_back(e);
      r.steps.push_back({g.constraint_root(c), g.variable_root(v), g.edge(e).weight, rank});
      progressed = true;
    }
    if (!progressed) break;
  }
  r.matching = Matching::from_local_edges(g, local_edges);
  r.complete_on_unknowns = r.matching.size() == g.num_unknowns();
  return r;
}

struct EliminationResult {
  Matching matching;
  std::vector<int> residual_candidates;  // root constraint indices, sorted
  std::vector<MatchStep> steps;          // in selection order
};

/// Weighted elimination: greedy minimum-cost variant of the information-front
/// matching. The candidate pool holds, for every unmatched constraint with
/// exactly one unknown variable, the admissible edge to that variable; each
/// iteration commits the cheapest candidate (ties: lowest constraint then
/// variable index) and marks the variable known. The oriented result is
/// loop-free by construction. Unmatched constraints whose variables all ended
/// up known become residual candidates.
inline EliminationResult weighted_elimination(const MatchingProblem& p) {
  const BipartiteGraph& g = *p.graph;
  std::vector<char> known(g.num_variables(), 0);
  for (int v = 0; v < g.num_variables(); ++v) known[v] = g.variable_known(v);
  std::vector<char> matched_c(g.num_constraints(), 0);

  auto sole_unknown = [&](int c) {
    int found = -1;
    for (int e : g.constraint_edges(c)) {
      int v = g.edge(e).variable;
      if (known[v]) continue;
      if (found != -1) return -2;
      found = v;
    }
    return found;
  };

  EliminationResult r;
  std::vector<int> local_edges;
  int iteration = 0;
  while (true) {
    int best_e = -1;
    for (int c = 0; c < g.num_constraints(); ++c) {
      if (matched_c[c]) continue;
      int v = sole_unknown(c);
      if (v < 0) continue;
      int e = g.find_edge(c, v);
      if (!admissible_edge(g.edge(e), p.causality)) continue;
      if (best_e == -1) {
        best_e = e;
        continue;
      }
      const auto& cand = g.edge(e);
      const auto& best = g.edge(best_e);
      if (std::tuple(cand.weight, cand.constraint, cand.variable) <
          std::tuple(best.weight, best.constraint, best.variable))
        best_e = e;
    }
    if (best_e == -1) break;
    const auto& e = g.edge(best_e);
    matched_c[e.constraint] = 1;
    known[e.variable] = 1;
    local_edges.push_back(best_e);
    r.steps.push_back({g.constraint_root(e.constraint), g.variable_root(e.variable),
                       e.weight, iteration++});
  }
  r.matching = Matching::from_local_edges(g, local_edges);
  for (int c = 0; c < g.num_constraints(); ++c)
    if (!matched_c[c] && sole_unknown(c) == -1)
      r.residual_candidates.push_back(g.constraint_root(c));
  std::sort(r.residual_candidates.begin(), r.residual_candidates.end());
  return r;
}

namespace detail {

/// Square assignment view of a matching problem: rows are the constraints,
/// columns the unknown variables (all-edge incidence); non-admissible pairs
/// carry the sentinel big = 1 + sum of all admissible weights.
struct AssignmentView {
  std::vector<int> rows;  // local constraint indices
  std::vector<int> cols;  // local variable indices
  std::vector<std::vector<Cost>> cost;
  Cost big = 1;
};

inline AssignmentView make_assignment_view(const MatchingProblem& p) {
  const BipartiteGraph& g = *p.graph;
  AssignmentView view;
  for (int c = 0; c < g.num_constraints(); ++c) view.rows.push_back(c);
  view.cols = g.unknown_variables();
  if (view.rows.size() != view.cols.size())
    throw std::invalid_argument("assignment problem is not square: " +
                                std::to_string(view.rows.size()) + " constraints vs " +
                                std::to_string(view.cols.size()) + " unknowns");
  for (const auto& e : g.edges())
    if (admissible_edge(e, p.causality) && !g.variable_known(e.variable))
      view.big += e.weight;
  std::vector<int> col_of(g.num_variables(), -1);
  for (size_t j = 0; j < view.cols.size(); ++j) col_of[view.cols[j]] = static_cast<int>(j);
  const int n = static_cast<int>(view.rows.size());
  view.cost.assign(n, std::vector<Cost>(n, view.big));
  for (const auto& e : g.edges()) {
    if (!admissible_edge(e, p.causality) || g.variable_known(e.variable)) continue;
    view.cost[e.constraint][col_of[e.variable]] = e.weight;
  }
  return view;
}

inline Matching matching_from_assignment(const BipartiteGraph& g, const AssignmentView& view,
                                         const Assignment& a) {
  std::vector<int> local;
  for (size_t i = 0; i < a.row_to_col.size(); ++i)
    local.push_back(g.find_edge(view.rows[i], view.cols[a.row_to_col[i]]));
  return Matching::from_local_edges(g, local);
}

}  // namespace detail

/// Minimum-cost perfect matching of a square problem, or nullopt when no
/// perfect matching exists (structurally singular subproblem).
inline std::optional<Matching> hungarian_min_cost(const MatchingProblem& p) {
  auto view = detail::make_assignment_view(p);
  Assignment a = solve_assignment(view.cost);
  if (!a.row_to_col.empty() && a.cost >= view.big) return std::nullopt;
  return detail::matching_from_assignment(*p.graph, view, a);
}

/// Lazy sequence of every perfect matching of a square problem in
/// non-decreasing cost order. Instances own their state; a single sequence
/// is not shareable across threads.
class GraphMurtyEnumerator {
 public:
  explicit GraphMurtyEnumerator(const MatchingProblem& p)
      : graph_(p.graph), view_(detail::make_assignment_view(p)),
        murty_(view_.cost, view_.big) {}

  std::optional<Matching> next() {
    auto a = murty_.next();
    if (!a) return std::nullopt;
    return detail::matching_from_assignment(*graph_, view_, *a);
  }

 private:
  const BipartiteGraph* graph_;
  detail::AssignmentView view_;
  MurtyEnumerator murty_;
};

}  // namespace strana
