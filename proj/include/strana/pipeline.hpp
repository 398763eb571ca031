#pragma once

#include <algorithm>
#include <atomic>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "strana/dm.hpp"
#include "strana/dot.hpp"
#include "strana/generate.hpp"
#include "strana/matching.hpp"
#include "strana/model_io.hpp"
#include "strana/mso.hpp"
#include "strana/residual.hpp"

namespace strana {

/// Exit codes shared by the library pipeline and the CLI.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitModelError = 2,
  kExitBudget = 3,        // MSO cap exceeded or a budget-starved MSO search
  kExitUnreachable = 4,   // detectable faults left uncovered by the selection
};

struct PipelineConfig {
  ToolSet tools = ToolSet::all();
  Causality causality = Causality::differential;  // a-priori matching step
  SelectionTarget target = SelectionTarget::detectability;
  std::int64_t murty_budget = -1;  // per candidate; -1 = |C|-1 default, 0 = unlimited
  std::int64_t mso_cap = 1'000'000;
  int jobs = 1;
  bool faultable_only = true;
};

/// Everything the three-step pipeline computes, in library terms.
struct PipelineStages {
  BipartiteGraph graph;
  DMDecomposition dm;
  std::vector<int> detectable;  // root constraint indices
  EliminationResult elimination;
  BipartiteGraph mso_graph;  // over part of the post-elimination remainder
  std::vector<MSOSet> msos_all;
  std::vector<MSOSet> msos;  // after the faultable filter (when enabled)
  bool cap_exceeded = false;
  std::vector<ResidualGenerator> pool;
  std::vector<int> budget_blocked;  // MSO indices with no residual + exhausted search
  SelectionResult selection;
};

inline PipelineStages run_stages(const StructuralModel& model, const PipelineConfig& cfg) {
  PipelineStages st;
  st.graph = BipartiteGraph::from_model(model);

  // Step 1: DM decomposition; detectability upper bound.
  st.dm = dm_decompose(st.graph);
  st.detectable = detectable_faults(st.dm, model);

  // Step 2: a-priori matching propagation on the over-constrained part.
  std::vector<int> over_locals;
  for (int root : st.dm.over.constraints)
    over_locals.push_back(st.graph.constraint_local(root));
  BipartiteGraph over_graph = st.graph.induced(over_locals);
  st.elimination = weighted_elimination({&over_graph, cfg.causality});

  // Step 3: MSO search on the remainder.
  BipartiteGraph remaining = remaining_graph(over_graph, st.elimination);
  auto dm_rem = dm_decompose(remaining);
  std::vector<int> plus_locals;
  for (int root : dm_rem.over.constraints)
    plus_locals.push_back(remaining.constraint_local(root));
  st.mso_graph = remaining.induced(plus_locals);
  try {
    st.msos_all = enumerate_msos(st.mso_graph, {cfg.mso_cap, cfg.jobs});
  } catch (const MsoCapExceeded&) {
    st.cap_exceeded = true;
    return st;
  }
  st.msos = cfg.faultable_only ? filter_faultable(st.msos_all, model) : st.msos_all;

  // Residual pool: elimination leftovers plus per-MSO optima.
  for (int cand : st.elimination.residual_candidates) {
    auto rg = generator_from_candidate(st.graph, model, cand, st.elimination.matching,
                                       cfg.tools);
    if (rg) st.pool.push_back(std::move(*rg));
  }
  {
    std::vector<OptimalResidualResult> results(st.msos.size());
    ResidualSearchOptions opt;
    opt.tools = cfg.tools;
    opt.murty_budget = cfg.murty_budget;
    const int jobs = std::max(1, std::min<int>(cfg.jobs, st.msos.size()));
    if (jobs <= 1) {
      for (size_t i = 0; i < st.msos.size(); ++i)
        results[i] = get_optimal_residual(st.graph, model, st.msos[i],
                                          st.elimination.matching, opt);
    } else {
      std::atomic<size_t> next{0};
      std::vector<std::thread> workers;
      for (int t = 0; t < jobs; ++t)
        workers.emplace_back([&] {
          for (size_t i = next.fetch_add(1); i < st.msos.size(); i = next.fetch_add(1))
            results[i] = get_optimal_residual(st.graph, model, st.msos[i],
                                              st.elimination.matching, opt);
        });
      for (auto& w : workers) w.join();
    }
    std::set<std::pair<int, std::vector<MatchedPair>>> seen;
    for (const auto& rg : st.pool)
      seen.insert({rg.residual_constraint, rg.matching.pairs});
    for (size_t i = 0; i < results.size(); ++i) {
      if (results[i].generator) {
        auto& rg = *results[i].generator;
        if (seen.insert({rg.residual_constraint, rg.matching.pairs}).second)
          st.pool.push_back(std::move(rg));
      } else if (results[i].any_budget_exhausted()) {
        st.budget_blocked.push_back(static_cast<int>(i));
      }
    }
  }

  st.selection = select_residuals(st.pool, cfg.target, st.detectable);
  return st;
}

// ---------------------------------------------------------------------------
// JSON / CSV artifacts. nlohmann::json keeps object keys sorted, so dumps are
// byte-deterministic for identical inputs.

namespace detail {

inline nlohmann::json constraint_ids(const StructuralModel& m, const std::vector<int>& roots) {
  nlohmann::json a = nlohmann::json::array();
  for (int c : roots) a.push_back(m.constraint(c).id);
  return a;
}

inline nlohmann::json variable_ids(const StructuralModel& m, const std::vector<int>& roots) {
  nlohmann::json a = nlohmann::json::array();
  for (int v : roots) a.push_back(m.variable(v).id);
  return a;
}

inline nlohmann::json matching_pairs_json(const StructuralModel& m, const Matching& match) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& p : match.pairs)
    a.push_back({{"constraint", m.constraint(p.constraint).id},
                 {"variable", m.variable(p.variable).id}});
  return a;
}

inline nlohmann::json plan_json(const StructuralModel& m, const std::vector<PlanStep>& plan) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& s : plan) {
    nlohmann::json step{{"kind", to_string(s.kind)}};
    if (s.kind == PlanStep::Kind::solve_block) {
      step["tool"] = to_string(s.tool);
      step["constraints"] = constraint_ids(m, s.constraints);
      step["variables"] = variable_ids(m, s.variables);
    } else {
      step["constraint"] = m.constraint(s.constraints.front()).id;
      if (s.kind == PlanStep::Kind::solve)
        step["variable"] = m.variable(s.variables.front()).id;
    }
    a.push_back(std::move(step));
  }
  return a;
}

}  // namespace detail

/// Fault signature matrix as CSV: one row per selected generator, one column
/// per detectable fault.
inline std::string signature_csv(const StructuralModel& m, const FaultSignatureMatrix& sig) {
  std::ostringstream out;
  out << "generator";
  for (int f : sig.faults) out << "," << m.constraint(f).id;
  out << "\n";
  for (size_t r = 0; r < sig.rows.size(); ++r) {
    out << m.constraint(sig.generator_constraints[r]).id;
    for (auto bit : sig.rows[r]) out << "," << int(bit);
    out << "\n";
  }
  return out.str();
}

struct DmReport {
  nlohmann::json summary;
  std::string permuted_csv;  // block-triangular biadjacency
};

inline DmReport dm_report(const StructuralModel& model) {
  BipartiteGraph g = BipartiteGraph::from_model(model);
  auto d = dm_decompose(g);
  DmReport rep;
  nlohmann::json& j = rep.summary;
  j["schema"] = "strana-dm-v1";
  auto part_json = [&](const DmPart& p) {
    return nlohmann::json{{"constraints", detail::constraint_ids(model, p.constraints)},
                          {"variables", detail::variable_ids(model, p.variables)},
                          {"num_constraints", p.constraints.size()},
                          {"num_variables", p.variables.size()},
                          {"witness", detail::matching_pairs_json(model, p.witness)}};
  };
  j["under"] = part_json(d.under);
  j["just"] = part_json(d.just);
  j["over"] = part_json(d.over);
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& b : d.hall_blocks)
    blocks.push_back({{"constraints", detail::constraint_ids(model, b.constraints)},
                      {"variables", detail::variable_ids(model, b.variables)},
                      {"size", b.constraints.size()}});
  j["hall_blocks"] = std::move(blocks);
  j["detectable_faults"] = detail::constraint_ids(model, detectable_faults(d, model));

  // Permuted biadjacency, lower block-triangular: rows C+, C0 (block order),
  // C-; columns X+, X0 (block order), X-.
  std::vector<int> row_roots = d.over.constraints;
  std::vector<int> col_roots = d.over.variables;
  for (const auto& b : d.hall_blocks) {
    row_roots.insert(row_roots.end(), b.constraints.begin(), b.constraints.end());
    col_roots.insert(col_roots.end(), b.variables.begin(), b.variables.end());
  }
  row_roots.insert(row_roots.end(), d.under.constraints.begin(), d.under.constraints.end());
  col_roots.insert(col_roots.end(), d.under.variables.begin(), d.under.variables.end());
  std::ostringstream csv;
  csv << "constraint";
  for (int v : col_roots) csv << "," << model.variable(v).id;
  csv << "\n";
  for (int c : row_roots) {
    csv << model.constraint(c).id;
    int lc = g.constraint_local(c);
    for (int v : col_roots) {
      int lv = g.variable_local(v);
      csv << "," << (g.find_edge(lc, lv) >= 0 ? 1 : 0);
    }
    csv << "\n";
  }
  rep.permuted_csv = csv.str();
  return rep;
}

enum class MatchAlgorithm { ranking, weighted_elimination, hungarian };

inline std::optional<MatchAlgorithm> match_algorithm_from_string(std::string_view s) {
  if (s == "ranking") return MatchAlgorithm::ranking;
  if (s == "weighted-elimination") return MatchAlgorithm::weighted_elimination;
  if (s == "hungarian") return MatchAlgorithm::hungarian;
  return std::nullopt;
}

/// `match` subcommand: run one engine on the model's full graph.
inline nlohmann::json match_report(const StructuralModel& model, MatchAlgorithm algorithm,
                                   Causality causality) {
  BipartiteGraph g = BipartiteGraph::from_model(model);
  MatchingProblem p{&g, causality};
  nlohmann::json j;
  j["schema"] = "strana-match-v1";
  j["causality"] = to_string(causality);
  auto fill = [&](const Matching& m) {
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& pr : m.pairs) {
      int e = g.find_edge(g.constraint_local(pr.constraint), g.variable_local(pr.variable));
      pairs.push_back({{"constraint", model.constraint(pr.constraint).id},
                       {"variable", model.variable(pr.variable).id},
                       {"weight", g.edge(e).weight}});
    }
    j["pairs"] = std::move(pairs);
    j["total_cost"] = m.total_weight;
    j["complete_on_unknowns"] = m.size() == g.num_unknowns();
  };
  switch (algorithm) {
    case MatchAlgorithm::ranking: {
      j["algorithm"] = "ranking";
      fill(ranking_match(p).matching);
      break;
    }
    case MatchAlgorithm::weighted_elimination: {
      j["algorithm"] = "weighted-elimination";
      auto r = weighted_elimination(p);
      fill(r.matching);
      j["residual_candidates"] = detail::constraint_ids(model, r.residual_candidates);
      break;
    }
    case MatchAlgorithm::hungarian: {
      j["algorithm"] = "hungarian";
      auto m = hungarian_min_cost(p);
      j["feasible"] = m.has_value();
      if (m) fill(*m);
      break;
    }
  }
  return j;
}

/// `check` subcommand: parse a matching (the strana-match-v1 pair list) and
/// report the calculability verdict.
inline nlohmann::json check_report(const StructuralModel& model,
                                   const nlohmann::json& matching_json,
                                   const ToolSet& tools) {
  BipartiteGraph g = BipartiteGraph::from_model(model);
  if (!matching_json.contains("pairs"))
    throw ModelError("matching JSON lacks a 'pairs' array");
  std::vector<int> local;
  for (const auto& jp : matching_json.at("pairs")) {
    int c = model.constraint_index(jp.at("constraint").get<std::string>());
    int v = model.variable_index(jp.at("variable").get<std::string>());
    if (c < 0 || v < 0) throw ModelError("matching references unknown ids");
    int e = g.find_edge(c, v);
    if (e < 0) throw ModelError("matching pair is not an edge of the model");
    local.push_back(e);
  }
  Matching m = Matching::from_local_edges(g, local);
  auto report = is_calculable(g, m, tools);
  nlohmann::json j;
  j["schema"] = "strana-check-v1";
  j["calculable"] = report.ok;
  j["rule"] = to_string(report.rule);
  if (!report.ok) {
    if (report.rule == CalcRule::missing_block_tool) {
      j["missing_tool"] = to_string(report.missing_tool);
      j["block"] = detail::constraint_ids(model, report.block_constraints);
    } else {
      j["edge"] = {{"constraint", model.constraint(report.edge_constraint).id},
                   {"variable", model.variable(report.edge_variable).id}};
    }
  }
  return j;
}

struct PipelineResult {
  int exit_code = kExitOk;
  nlohmann::json summary;
  std::string signature_csv;
  std::vector<std::string> diagnostics;
};

/// The full three-step pipeline with machine-readable artifacts. Identical
/// inputs yield byte-identical artifacts, independent of the jobs count.
inline PipelineResult run_pipeline(const StructuralModel& model,
                                   const PipelineConfig& cfg) {
  PipelineResult out;
  PipelineStages st = run_stages(model, cfg);

  nlohmann::json& j = out.summary;
  j["schema"] = "strana-pipeline-v1";
  j["model"] = {{"constraints", model.constraints().size()},
                {"variables", model.variables().size()},
                {"unknowns", model.num_unknowns()}};
  j["dm"] = {{"under", {{"constraints", st.dm.under.constraints.size()},
                        {"variables", st.dm.under.variables.size()}}},
             {"just", {{"constraints", st.dm.just.constraints.size()},
                       {"variables", st.dm.just.variables.size()}}},
             {"over", {{"constraints", st.dm.over.constraints.size()},
                       {"variables", st.dm.over.variables.size()}}}};
  j["detectable_faults"] = detail::constraint_ids(model, st.detectable);

  if (st.cap_exceeded) {
    j["error"] = "mso-cap-exceeded";
    out.exit_code = kExitBudget;
    out.diagnostics.push_back("MSO enumeration exceeded the cap; rerun with a larger "
                              "--mso-cap");
    return out;
  }

  j["elimination"] = {
      {"matched", st.elimination.matching.size()},
      {"matched_cost", st.elimination.matching.total_weight},
      {"residual_candidates",
       detail::constraint_ids(model, st.elimination.residual_candidates)}};
  j["msos"] = {{"count", st.msos_all.size()},
               {"faultable", st.msos.size()},
               {"faultable_only", cfg.faultable_only}};
  j["pool_size"] = st.pool.size();

  nlohmann::json selected = nlohmann::json::array();
  for (int idx : st.selection.selected) {
    const auto& rg = st.pool[idx];
    selected.push_back({{"constraint", model.constraint(rg.residual_constraint).id},
                        {"cost", rg.cost},
                        {"matching", detail::matching_pairs_json(model, rg.matching)},
                        {"sensitive_faults",
                         detail::constraint_ids(model, rg.sensitive_faults)},
                        {"plan", detail::plan_json(model, evaluation_plan(rg, st.graph))}});
  }
  j["selected"] = std::move(selected);

  nlohmann::json sig;
  sig["faults"] = detail::constraint_ids(model, st.selection.signature.faults);
  nlohmann::json rows = nlohmann::json::array();
  for (size_t r = 0; r < st.selection.signature.rows.size(); ++r) {
    std::string bits;
    for (auto b : st.selection.signature.rows[r]) bits += b ? '1' : '0';
    rows.push_back({{"generator",
                     model.constraint(st.selection.signature.generator_constraints[r]).id},
                    {"bits", bits}});
  }
  sig["rows"] = std::move(rows);
  j["signature"] = std::move(sig);
  j["uncovered_faults"] = detail::constraint_ids(model, st.selection.uncovered_faults);
  j["metrics"] = {{"covered", st.detectable.size() - st.selection.uncovered_faults.size()},
                  {"detectable", st.detectable.size()},
                  {"distinguished_pairs", st.selection.distinguished_pairs},
                  {"target", to_string(cfg.target)}};

  out.signature_csv = signature_csv(model, st.selection.signature);

  for (int i : st.budget_blocked)
    out.diagnostics.push_back("MSO #" + std::to_string(i) +
                              " found no calculable residual within the Murty budget");
  if (!st.budget_blocked.empty()) {
    j["error"] = "murty-budget-exhausted";
    out.exit_code = kExitBudget;
  } else if (!st.selection.uncovered_faults.empty()) {
    out.exit_code = kExitUnreachable;
    out.diagnostics.push_back(std::to_string(st.selection.uncovered_faults.size()) +
                              " detectable fault(s) not covered by the selection");
  }
  return out;
}

/// Tool-set flags: comma-separated names, or "all"/"none".
inline std::optional<ToolSet> tools_from_string(std::string_view spec) {
  ToolSet t;
  size_t i = 0;
  while (i <= spec.size()) {
    size_t j = spec.find(',', i);
    if (j == std::string_view::npos) j = spec.size();
    std::string_view item = spec.substr(i, j - i);
    if (item == "all") t = ToolSet::all();
    else if (item == "none") t = ToolSet::none();
    else if (item == "differentiator") t.differentiator = true;
    else if (item == "integrator") t.integrator = true;
    else if (item == "linear-solver") t.linear_solver = true;
    else if (item == "nonlinear-solver") t.nonlinear_solver = true;
    else if (item == "de-solver") t.differential_equation_solver = true;
    else if (!item.empty()) return std::nullopt;
    i = j + 1;
  }
  return t;
}

}  // namespace strana
