#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "strana/cost.hpp"
#include "strana/graph.hpp"

namespace strana {

enum class RequiredTool { none, linear_solver, nonlinear_solver, differential_equation_solver };

inline const char* to_string(RequiredTool t) {
  switch (t) {
    case RequiredTool::none: return "none";
    case RequiredTool::linear_solver: return "linear-algebraic-solver";
    case RequiredTool::nonlinear_solver: return "nonlinear-algebraic-solver";
    case RequiredTool::differential_equation_solver: return "differential-equation-solver";
  }
  return "?";
}

inline bool tool_available(RequiredTool t, const ToolSet& tools) {
  switch (t) {
    case RequiredTool::none: return true;
    case RequiredTool::linear_solver: return tools.linear_solver;
    case RequiredTool::nonlinear_solver: return tools.nonlinear_solver;
    case RequiredTool::differential_equation_solver:
      return tools.differential_equation_solver;
  }
  return false;
}

/// One Koenig-Hall block of the oriented evaluation graph: an SCC with the
/// solver class it needs. Size-1 blocks are plain substitutions.
struct BlockClassification {
  std::vector<int> constraints;  // root indices, sorted
  std::vector<int> variables;    // root indices, sorted
  RequiredTool required_tool = RequiredTool::none;

  int size() const { return static_cast<int>(constraints.size() + variables.size()); }
};

namespace detail {

inline void require_complete(const BipartiteGraph& g, const Matching& m) {
  int covered = 0;
  for (const auto& p : m.pairs) {
    int v = g.variable_local(p.variable);
    if (v >= 0 && !g.variable_known(v)) ++covered;
  }
  if (covered != g.num_unknowns())
    throw std::invalid_argument("matching is not complete on the unknown variables");
}

}  // namespace detail

/// SCCs of orient(g, m) in evaluation order, classified by required solver:
/// a block with a differential constraint needs the differential-equation
/// solver, else one with a nonlinear constraint needs the nonlinear solver,
/// else blocks of size > 1 need the linear solver.
inline std::vector<BlockClassification> classify_blocks(const BipartiteGraph& g,
                                                        const Matching& m) {
  detail::require_complete(g, m);
  DirectedGraph d = orient(g, m);
  std::vector<BlockClassification> blocks;
  for (const auto& comp : d.strongly_connected_components()) {
    BlockClassification b;
    bool has_differential = false, has_nonlinear = false;
    for (int u : comp) {
      if (d.is_constraint_vertex(u)) {
        int c = d.vertex_constraint(u);
        b.constraints.push_back(g.constraint_root(c));
        has_differential |= g.constraint_kind(c) == ConstraintKind::differential;
        has_nonlinear |= g.constraint_kind(c) == ConstraintKind::algebraic_nonlinear;
      } else {
        b.variables.push_back(g.variable_root(d.vertex_variable(u)));
      }
    }
    std::sort(b.constraints.begin(), b.constraints.end());
    std::sort(b.variables.begin(), b.variables.end());
    if (b.size() > 1) {
      b.required_tool = has_differential ? RequiredTool::differential_equation_solver
                        : has_nonlinear  ? RequiredTool::nonlinear_solver
                                         : RequiredTool::linear_solver;
    }
    blocks.push_back(std::move(b));
  }
  return blocks;
}

enum class CalcRule {
  ok,
  missing_block_tool,      // (a) a block's solver is not in the tool set
  derivative_in_loop,      // (b) derivative-role matched edge inside a block
  integral_on_open_path,   // (c) integral-role matched edge outside any block
  missing_differentiator,  // (d) acyclic derivative-role edge, no differentiator
};

inline const char* to_string(CalcRule r) {
  switch (r) {
    case CalcRule::ok: return "ok";
    case CalcRule::missing_block_tool: return "missing-block-tool";
    case CalcRule::derivative_in_loop: return "derivative-in-loop";
    case CalcRule::integral_on_open_path: return "integral-on-open-path";
    case CalcRule::missing_differentiator: return "missing-differentiator";
  }
  return "?";
}

/// Verdict of is_calculable. On rejection, `rule` names the first violated
/// rule and the offending block or matched edge (root indices).
struct CalcReport {
  bool ok = true;
  CalcRule rule = CalcRule::ok;
  RequiredTool missing_tool = RequiredTool::none;
  std::vector<int> block_constraints;  // rule (a)
  int edge_constraint = -1;            // rules (b)-(d)
  int edge_variable = -1;
};

/// Calculation-causality check: can this complete matching be evaluated with
/// the declared tool set? Rules, in order:
///   (a) every block's required solver is available;
///   (b) no derivative-role matched edge lies inside a block (differential
///       equation solvers integrate, they do not differentiate);
///   (c) every integral-role matched edge lies inside a block -- open-loop
///       integration on a path is rejected outright;
///   (d) derivative-role matched edges on paths need the differentiator.
inline CalcReport is_calculable(const BipartiteGraph& g, const Matching& m,
                                const ToolSet& tools) {
  detail::require_complete(g, m);
  DirectedGraph d = orient(g, m);
  auto comps = d.strongly_connected_components();
  std::vector<int> comp_of(d.num_vertices(), -1);
  std::vector<int> comp_size(comps.size(), 0);
  for (size_t i = 0; i < comps.size(); ++i) {
    comp_size[i] = static_cast<int>(comps[i].size());
    for (int u : comps[i]) comp_of[u] = static_cast<int>(i);
  }

  CalcReport report;
  // (a) block solver availability, blocks in evaluation order.
  for (const auto& b : classify_blocks(g, m)) {
    if (tool_available(b.required_tool, tools)) continue;
    report.ok = false;
    report.rule = CalcRule::missing_block_tool;
    report.missing_tool = b.required_tool;
    report.block_constraints = b.constraints;
    return report;
  }

  auto matched_in_block = [&](const GraphEdge& e) {
    int cu = comp_of[d.constraint_vertex(e.constraint)];
    int vu = comp_of[d.variable_vertex(e.variable)];
    return cu == vu && comp_size[cu] > 1;
  };
  std::vector<int> local = matching_local_edges(g, m);
  std::sort(local.begin(), local.end());
  auto reject_edge = [&](CalcRule rule, const GraphEdge& e) {
    report.ok = false;
    report.rule = rule;
    report.edge_constraint = g.constraint_root(e.constraint);
    report.edge_variable = g.variable_root(e.variable);
  };
  for (int el : local) {  // (b)
    const auto& e = g.edge(el);
    if (e.role == DynamicRole::derivative && matched_in_block(e)) {
      reject_edge(CalcRule::derivative_in_loop, e);
      return report;
    }
  }
  for (int el : local) {  // (c)
    const auto& e = g.edge(el);
    if (e.role == DynamicRole::integral && !matched_in_block(e)) {
      reject_edge(CalcRule::integral_on_open_path, e);
      return report;
    }
  }
  for (int el : local) {  // (d)
    const auto& e = g.edge(el);
    if (e.role == DynamicRole::derivative && !matched_in_block(e) &&
        !tools.differentiator) {
      reject_edge(CalcRule::missing_differentiator, e);
      return report;
    }
  }
  return report;
}

}  // namespace strana
