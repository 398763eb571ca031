#pragma once

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "strana/calculability.hpp"
#include "strana/matching.hpp"
#include "strana/mso.hpp"

namespace strana {

/// An unmatched constraint plus the matching that computes every unknown it
/// needs (possibly spanning the a-priori elimination matching and an
/// MSO-local matching). cost = sum of matched-edge weights over the
/// evaluation subgraph + eval_cost of the residual constraint.
struct ResidualGenerator {
  int residual_constraint = -1;  // root index
  Matching matching;
  Cost cost = 0;
  std::vector<int> sensitive_faults;  // root indices, sorted
};

enum class CandidateStatus { found, none_exists, budget_exhausted };

struct CandidateOutcome {
  int constraint = -1;  // root index of the candidate residual
  CandidateStatus status = CandidateStatus::none_exists;
  Cost cost = 0;               // valid when status == found
  std::int64_t iterations = 0;  // Murty matchings examined
};

struct ResidualSearchOptions {
  /// Murty matchings examined per candidate before giving up. -1 uses the
  /// default bound |C|-1 (|C| constraints in the MSO); 0 means unlimited.
  std::int64_t murty_budget = -1;
  ToolSet tools;
};

struct OptimalResidualResult {
  std::optional<ResidualGenerator> generator;
  std::vector<CandidateOutcome> outcomes;
  bool closure_blocked = false;  // the shared a-priori chain is not calculable

  bool any_budget_exhausted() const {
    for (const auto& o : outcomes)
      if (o.status == CandidateStatus::budget_exhausted) return true;
    return false;
  }
};

namespace detail {

/// Transitive closure of the base matching needed to supply values for the
/// given root variables: for every base-matched variable pulled in, the
/// constraint that computes it joins the evaluation, together with whatever
/// its other variables need. The base matching is loop-free, so this
/// terminates.
struct BaseClosure {
  std::vector<MatchedPair> pairs;    // base pairs used, sorted
  std::vector<int> constraints;      // root indices of pulled-in constraints
};

inline BaseClosure base_closure(const BipartiteGraph& g, const Matching& base,
                                const std::vector<int>& seed_constraint_roots) {
  std::map<int, int> base_of_var;  // root var -> root constraint
  for (const auto& p : base.pairs) base_of_var[p.variable] = p.constraint;

  BaseClosure closure;
  std::vector<int> var_queue;
  std::vector<char> var_seen;
  auto see_var = [&](int root_v) {
    if (root_v >= static_cast<int>(var_seen.size())) var_seen.resize(root_v + 1, 0);
    if (var_seen[root_v]) return;
    var_seen[root_v] = 1;
    if (base_of_var.count(root_v)) var_queue.push_back(root_v);
  };

  auto vars_of_constraint = [&](int root_c) {
    std::vector<int> out;
    int lc = g.constraint_local(root_c);
    if (lc < 0) throw std::invalid_argument("constraint not in graph");
    for (int e : g.constraint_edges(lc)) {
      int v = g.edge(e).variable;
      if (!g.variable_known(v)) out.push_back(g.variable_root(v));
    }
    return out;
  };

  for (int c : seed_constraint_roots)
    for (int v : vars_of_constraint(c)) see_var(v);
  while (!var_queue.empty()) {
    int v = var_queue.back();
    var_queue.pop_back();
    int c = base_of_var.at(v);
    closure.pairs.push_back({c, v});
    closure.constraints.push_back(c);
    for (int u : vars_of_constraint(c))
      if (u != v) see_var(u);
  }
  std::sort(closure.pairs.begin(), closure.pairs.end());
  std::sort(closure.constraints.begin(), closure.constraints.end());
  return closure;
}

inline Matching matching_from_pairs(const BipartiteGraph& g,
                                    const std::vector<MatchedPair>& pairs) {
  std::vector<int> local;
  for (const auto& p : pairs) {
    int c = g.constraint_local(p.constraint);
    int v = g.variable_local(p.variable);
    int e = (c >= 0 && v >= 0) ? g.find_edge(c, v) : -1;
    if (e < 0) throw std::invalid_argument("pair is not an edge of the graph");
    local.push_back(e);
  }
  return Matching::from_local_edges(g, local);
}

/// Faults the residual is structurally sensitive to: faultable constraints
/// reachable from the residual constraint in the reversed oriented
/// evaluation graph.
inline std::vector<int> sensitive_faults(const BipartiteGraph& model_graph,
                                         const StructuralModel& model,
                                         int residual_root, const Matching& matching) {
  std::vector<int> eval_constraints{residual_root};
  for (const auto& p : matching.pairs) eval_constraints.push_back(p.constraint);
  std::vector<int> locals;
  for (int root : eval_constraints) locals.push_back(model_graph.constraint_local(root));
  BipartiteGraph g_eval = model_graph.induced(locals);
  DirectedGraph rev = orient(g_eval, matching).reversed();
  int src = g_eval.constraint_local(residual_root);
  std::vector<int> out;
  for (int u : rev.reachable_from({rev.constraint_vertex(src)})) {
    if (!rev.is_constraint_vertex(u)) continue;
    int root = g_eval.constraint_root(rev.vertex_constraint(u));
    if (model.constraint(root).faultable) out.push_back(root);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace detail

/// Builds the residual generator for an unmatched constraint whose unknowns
/// are all determined by the base matching (the weighted-elimination residual
/// candidates). Returns nullopt when the evaluation chain is not calculable
/// with the given tools.
inline std::optional<ResidualGenerator> generator_from_candidate(
    const BipartiteGraph& model_graph, const StructuralModel& model,
    int constraint_root, const Matching& base, const ToolSet& tools) {
  auto closure = detail::base_closure(model_graph, base, {constraint_root});
  Matching matching = detail::matching_from_pairs(model_graph, closure.pairs);

  std::vector<int> locals{model_graph.constraint_local(constraint_root)};
  for (int c : closure.constraints) locals.push_back(model_graph.constraint_local(c));
  BipartiteGraph g_eval = model_graph.induced(locals);
  if (!is_calculable(g_eval, matching, tools).ok) return std::nullopt;

  ResidualGenerator rg;
  rg.residual_constraint = constraint_root;
  rg.matching = matching;
  rg.cost = matching.total_weight + model.constraint(constraint_root).eval_cost;
  rg.sensitive_faults =
      detail::sensitive_faults(model_graph, model, constraint_root, matching);
  return rg;
}

/// Algorithm: for every candidate residual constraint of the MSO, enumerate
/// the perfect matchings of the remaining just-constrained subgraph in
/// ascending cost (Murty) and accept the first calculable one; return the
/// cheapest (candidate, matching) overall. Variables determined by the base
/// matching count as known inside the MSO; the pulled-in base chain is costed
/// into the generator and checked for calculability once up front.
inline OptimalResidualResult get_optimal_residual(const BipartiteGraph& model_graph,
                                                  const StructuralModel& model,
                                                  const MSOSet& mso, const Matching& base,
                                                  const ResidualSearchOptions& options = {}) {
  OptimalResidualResult result;
  const int n = static_cast<int>(mso.constraints.size());
  if (n == 0) throw std::invalid_argument("degenerate MSO: no constraints");

  auto closure = detail::base_closure(model_graph, base, mso.constraints);
  Matching closure_matching = detail::matching_from_pairs(model_graph, closure.pairs);
  if (!closure.constraints.empty()) {
    std::vector<int> locals;
    for (int c : closure.constraints) locals.push_back(model_graph.constraint_local(c));
    BipartiteGraph g_cl = model_graph.induced(locals);
    if (!is_calculable(g_cl, closure_matching, options.tools).ok) {
      result.closure_blocked = true;
      return result;
    }
  }

  std::vector<int> base_known;
  for (const auto& p : base.pairs) base_known.push_back(p.variable);

  const std::int64_t budget = options.murty_budget < 0
                                  ? std::max<std::int64_t>(1, n - 1)
                                  : options.murty_budget;
  std::optional<ResidualGenerator> best;
  for (int cj : mso.constraints) {
    CandidateOutcome outcome;
    outcome.constraint = cj;
    std::vector<int> others;
    for (int c : mso.constraints)
      if (c != cj) others.push_back(model_graph.constraint_local(c));
    BipartiteGraph g_r = model_graph.induced(others, base_known);

    std::optional<Matching> accepted;
    if (g_r.num_constraints() == g_r.num_unknowns()) {
      GraphMurtyEnumerator murty({&g_r, Causality::mixed});
      while (true) {
        if (budget > 0 && outcome.iterations >= budget) {
          outcome.status = CandidateStatus::budget_exhausted;
          break;
        }
        auto m = murty.next();
        if (!m) {
          outcome.status = CandidateStatus::none_exists;
          break;
        }
        ++outcome.iterations;
        if (is_calculable(g_r, *m, options.tools).ok) {
          accepted = std::move(m);
          outcome.status = CandidateStatus::found;
          break;
        }
      }
    } else {
      outcome.status = CandidateStatus::none_exists;
    }

    if (accepted) {
      // The residual constraint itself must be evaluable: every unknown it
      // touches has to be computed by the local matching, the base chain,
      // or be known already.
      bool evaluable = true;
      int lcj = model_graph.constraint_local(cj);
      for (int e : model_graph.constraint_edges(lcj)) {
        int v = model_graph.edge(e).variable;
        if (model_graph.variable_known(v)) continue;
        int root = model_graph.variable_root(v);
        bool covered = std::any_of(accepted->pairs.begin(), accepted->pairs.end(),
                                   [&](const MatchedPair& p) { return p.variable == root; });
        covered = covered || std::any_of(base.pairs.begin(), base.pairs.end(),
                                         [&](const MatchedPair& p) {
                                           return p.variable == root;
                                         });
        if (!covered) {
          evaluable = false;
          break;
        }
      }
      if (!evaluable) {
        outcome.status = CandidateStatus::none_exists;
      } else {
        Matching combined = Matching::merged(*accepted, closure_matching);
        Cost cost = combined.total_weight + model.constraint(cj).eval_cost;
        outcome.cost = cost;
        if (!best || cost < best->cost) {
          ResidualGenerator rg;
          rg.residual_constraint = cj;
          rg.matching = std::move(combined);
          rg.cost = cost;
          best = std::move(rg);
        }
      }
    }
    result.outcomes.push_back(outcome);
  }
  if (best) {
    best->sensitive_faults = detail::sensitive_faults(model_graph, model,
                                                      best->residual_constraint,
                                                      best->matching);
    result.generator = std::move(best);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Selection and the fault signature matrix.

enum class SelectionTarget { detectability, isolability };

inline const char* to_string(SelectionTarget t) {
  return t == SelectionTarget::detectability ? "detectability" : "isolability";
}

struct FaultSignatureMatrix {
  std::vector<int> faults;                       // columns: root indices, sorted
  std::vector<int> generator_constraints;        // per row: residual constraint root
  std::vector<std::vector<unsigned char>> rows;  // rows[i][j] = sensitivity bit
};

struct SelectionResult {
  std::vector<int> selected;  // indices into the input pool, selection order
  FaultSignatureMatrix signature;
  std::vector<int> uncovered_faults;     // root indices
  std::int64_t distinguished_pairs = 0;  // isolability metric of the selection
};

/// Ascending-cost greedy selection: a generator joins the selection iff it
/// strictly improves the target metric (newly covered faults, or newly
/// distinguished fault pairs); the scan stops once the metric matches the
/// whole pool's. Ties in cost break toward the lower residual constraint.
inline SelectionResult select_residuals(const std::vector<ResidualGenerator>& pool,
                                        SelectionTarget target,
                                        const std::vector<int>& faults) {
  std::vector<int> fault_cols = faults;
  std::sort(fault_cols.begin(), fault_cols.end());
  const int nf = static_cast<int>(fault_cols.size());
  auto col_of = [&](int root) {
    auto it = std::lower_bound(fault_cols.begin(), fault_cols.end(), root);
    return (it != fault_cols.end() && *it == root)
               ? static_cast<int>(it - fault_cols.begin())
               : -1;
  };

  std::vector<std::vector<unsigned char>> sig(pool.size(),
                                              std::vector<unsigned char>(nf, 0));
  for (size_t i = 0; i < pool.size(); ++i)
    for (int f : pool[i].sensitive_faults)
      if (int j = col_of(f); j >= 0) sig[i][j] = 1;

  std::vector<int> order(pool.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return std::pair(pool[a].cost, pool[a].residual_constraint) <
           std::pair(pool[b].cost, pool[b].residual_constraint);
  });

  auto covered_count = [&](const std::vector<unsigned char>& covered) {
    std::int64_t n = 0;
    for (auto b : covered) n += b;
    return n;
  };
  auto distinguished_count = [&](const std::vector<int>& rows) {
    std::int64_t n = 0;
    for (int i = 0; i < nf; ++i)
      for (int j = i + 1; j < nf; ++j)
        for (int r : rows)
          if (sig[r][i] != sig[r][j]) {
            ++n;
            break;
          }
    return n;
  };

  // Pool-wide maximum of the metric: the greedy scan stops when it reaches it.
  std::int64_t pool_max = 0;
  {
    std::vector<unsigned char> covered(nf, 0);
    std::vector<int> all(order.begin(), order.end());
    for (int r : all)
      for (int j = 0; j < nf; ++j) covered[j] |= sig[r][j];
    pool_max = target == SelectionTarget::detectability ? covered_count(covered)
                                                        : distinguished_count(all);
  }

  SelectionResult result;
  std::vector<unsigned char> covered(nf, 0);
  std::int64_t metric = 0;
  for (int r : order) {
    if (metric >= pool_max) break;
    std::int64_t candidate_metric;
    if (target == SelectionTarget::detectability) {
      std::int64_t gain = 0;
      for (int j = 0; j < nf; ++j) gain += !covered[j] && sig[r][j] ? 1 : 0;
      candidate_metric = metric + gain;
    } else {
      std::vector<int> rows = result.selected;
      rows.push_back(r);
      candidate_metric = distinguished_count(rows);
    }
    if (candidate_metric > metric) {
      result.selected.push_back(r);
      metric = candidate_metric;
      for (int j = 0; j < nf; ++j) covered[j] |= sig[r][j];
    }
  }

  result.signature.faults = fault_cols;
  for (int r : result.selected) {
    result.signature.generator_constraints.push_back(pool[r].residual_constraint);
    result.signature.rows.push_back(sig[r]);
  }
  for (int j = 0; j < nf; ++j)
    if (!covered[j]) result.uncovered_faults.push_back(fault_cols[j]);
  result.distinguished_pairs = distinguished_count(result.selected);
  return result;
}

// ---------------------------------------------------------------------------
// Evaluation plans.

struct PlanStep {
  enum class Kind { solve, solve_block, evaluate_residual };
  Kind kind = Kind::solve;
  std::vector<int> constraints;  // root indices, sorted
  std::vector<int> variables;    // root indices, sorted (assigned variables)
  RequiredTool tool = RequiredTool::none;
};

inline const char* to_string(PlanStep::Kind k) {
  switch (k) {
    case PlanStep::Kind::solve: return "solve";
    case PlanStep::Kind::solve_block: return "block";
    case PlanStep::Kind::evaluate_residual: return "residual";
  }
  return "?";
}

/// Serializes the generator's evaluation: substitution steps and simultaneous
/// blocks in dependency order, then the residual evaluation. Every unknown is
/// assigned before use.
inline std::vector<PlanStep> evaluation_plan(const ResidualGenerator& rg,
                                             const BipartiteGraph& model_graph) {
  std::vector<int> locals{model_graph.constraint_local(rg.residual_constraint)};
  for (const auto& p : rg.matching.pairs)
    locals.push_back(model_graph.constraint_local(p.constraint));
  BipartiteGraph g_eval = model_graph.induced(locals);

  std::vector<PlanStep> plan;
  for (const auto& b : classify_blocks(g_eval, rg.matching)) {
    if (b.constraints.empty()) continue;  // variable-only vertices
    // The residual constraint is unmatched, hence a sink and never part of a
    // cycle; its step goes last.
    if (b.size() == 1 && b.constraints.front() == rg.residual_constraint) continue;
    PlanStep step;
    step.constraints = b.constraints;
    step.variables = b.variables;
    if (b.size() > 1) {
      step.kind = PlanStep::Kind::solve_block;
      step.tool = b.required_tool;
    } else {
      step.kind = PlanStep::Kind::solve;
      // The matched variable of a singleton block.
      for (const auto& p : rg.matching.pairs)
        if (p.constraint == b.constraints.front()) step.variables = {p.variable};
    }
    plan.push_back(std::move(step));
  }
  PlanStep final_step;
  final_step.kind = PlanStep::Kind::evaluate_residual;
  final_step.constraints = {rg.residual_constraint};
  plan.push_back(std::move(final_step));
  return plan;
}

}  // namespace strana
