#pragma once

#include <algorithm>
#include <functional>
#include <vector>

#include "strana/graph.hpp"

namespace strana {
namespace detail {

/// Maximum-cardinality matching (Hopcroft-Karp) between constraints and the
/// unknown variables, over solvable edges. `active_c` / `treat_known` narrow
/// the subsystem; empty vectors mean "all" / "none".
struct HkResult {
  std::vector<int> constraint_match;  // local c -> local v or -1
  std::vector<int> variable_match;    // local v -> local c or -1
  int size = 0;
};

inline HkResult hopcroft_karp(const BipartiteGraph& g,
                              const std::vector<char>& active_c = {},
                              const std::vector<char>& treat_known = {}) {
  const int nc = g.num_constraints(), nv = g.num_variables();
  auto c_active = [&](int c) { return active_c.empty() || active_c[c]; };
  auto v_usable = [&](int v) {
    return !g.variable_known(v) && (treat_known.empty() || !treat_known[v]);
  };
  HkResult r;
  r.constraint_match.assign(nc, -1);
  r.variable_match.assign(nv, -1);

  const int INF = nc + nv + 1;
  std::vector<int> dist(nc);
  std::vector<int> queue;
  queue.reserve(nc);

  auto bfs = [&]() {
    queue.clear();
    for (int c = 0; c < nc; ++c) {
      if (!c_active(c)) {
        dist[c] = INF;
        continue;
      }
      if (r.constraint_match[c] == -1) {
        dist[c] = 0;
        queue.push_back(c);
      } else {
        dist[c] = INF;
      }
    }
    bool found_free_var = false;
    for (size_t qi = 0; qi < queue.size(); ++qi) {
      int c = queue[qi];
      for (int e : g.constraint_edges(c)) {
        const auto& ge = g.edge(e);
        if (!ge.solvable || !v_usable(ge.variable)) continue;
        int c2 = r.variable_match[ge.variable];
        if (c2 == -1) {
          found_free_var = true;
        } else if (dist[c2] == INF) {
          dist[c2] = dist[c] + 1;
          queue.push_back(c2);
        }
      }
    }
    return found_free_var;
  };

  std::function<bool(int)> try_augment = [&](int c) -> bool {
    for (int e : g.constraint_edges(c)) {
      const auto& ge = g.edge(e);
      if (!ge.solvable || !v_usable(ge.variable)) continue;
      int c2 = r.variable_match[ge.variable];
      if (c2 == -1 || (dist[c2] == dist[c] + 1 && try_augment(c2))) {
        r.constraint_match[c] = ge.variable;
        r.variable_match[ge.variable] = c;
        return true;
      }
    }
    dist[c] = INF;
    return false;
  };

  while (bfs()) {
    for (int c = 0; c < nc; ++c)
      if (c_active(c) && r.constraint_match[c] == -1 && try_augment(c)) ++r.size;
  }
  return r;
}

}  // namespace detail

/// Maximum-cardinality matching of g over solvable edges and unknown columns.
inline Matching maximum_matching(const BipartiteGraph& g) {
  auto hk = detail::hopcroft_karp(g);
  std::vector<int> local;
  for (int c = 0; c < g.num_constraints(); ++c)
    if (hk.constraint_match[c] != -1)
      local.push_back(g.find_edge(c, hk.constraint_match[c]));
  return Matching::from_local_edges(g, local);
}

struct DmPart {
  std::vector<int> constraints;  // root indices, sorted
  std::vector<int> variables;    // root indices (unknowns only), sorted
  Matching witness;
};

struct HallBlock {
  std::vector<int> constraints;  // root indices, sorted
  std::vector<int> variables;    // root indices, sorted
};

struct DMDecomposition {
  DmPart under;  // |C-| < |X-| (or both empty); complete matching on C-
  DmPart just;   // |C0| = |X0|; perfect matching
  DmPart over;   // |C+| > |X+| (or both empty); complete matching on X+
  std::vector<HallBlock> hall_blocks;  // blocks of the just part, evaluation order
};

/// Dulmage-Mendelsohn decomposition over the solvable-edge subgraph: maximum
/// matching plus alternating reachability. Vertices reachable (alternating)
/// from free unknown variables form the under-constrained part; vertices
/// reachable from free constraints form the over-constrained part.
inline DMDecomposition dm_decompose(const BipartiteGraph& g) {
  const int nc = g.num_constraints(), nv = g.num_variables();
  auto hk = detail::hopcroft_karp(g);

  enum : char { kNone = 0, kUnder, kOver };
  std::vector<char> cpart(nc, kNone), vpart(nv, kNone);

  // Under part: from free unknowns, var -> (any solvable edge) -> constraint,
  // constraint -> (its matched edge) -> var.
  {
    std::vector<int> stack;
    for (int v = 0; v < nv; ++v)
      if (!g.variable_known(v) && hk.variable_match[v] == -1) {
        vpart[v] = kUnder;
        stack.push_back(v);
      }
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int e : g.variable_edges(v)) {
        const auto& ge = g.edge(e);
        if (!ge.solvable) continue;
        int c = ge.constraint;
        if (cpart[c] != kNone) continue;
        cpart[c] = kUnder;
        int vm = hk.constraint_match[c];
        if (vm != -1 && vpart[vm] == kNone) {
          vpart[vm] = kUnder;
          stack.push_back(vm);
        }
      }
    }
  }
  // Over part: from free constraints, constraint -> (any solvable edge) ->
  // unknown var, var -> (its matched edge) -> constraint.
  {
    std::vector<int> stack;
    for (int c = 0; c < nc; ++c)
      if (hk.constraint_match[c] == -1) {
        cpart[c] = kOver;
        stack.push_back(c);
      }
    while (!stack.empty()) {
      int c = stack.back();
      stack.pop_back();
      for (int e : g.constraint_edges(c)) {
        const auto& ge = g.edge(e);
        if (!ge.solvable || g.variable_known(ge.variable)) continue;
        int v = ge.variable;
        if (vpart[v] != kNone) continue;
        vpart[v] = kOver;
        int cm = hk.variable_match[v];
        if (cm != -1 && cpart[cm] == kNone) {
          cpart[cm] = kOver;
          stack.push_back(cm);
        }
      }
    }
  }

  DMDecomposition d;
  auto matched_edge = [&](int c) { return g.find_edge(c, hk.constraint_match[c]); };
  std::vector<int> under_m, just_m, over_m;
  std::vector<int> just_constraints_local;
  for (int c = 0; c < nc; ++c) {
    DmPart& part = cpart[c] == kUnder ? d.under : cpart[c] == kOver ? d.over : d.just;
    part.constraints.push_back(g.constraint_root(c));
    if (cpart[c] == kNone) just_constraints_local.push_back(c);
    if (hk.constraint_match[c] == -1) continue;
    (cpart[c] == kUnder ? under_m : cpart[c] == kOver ? over_m : just_m)
        .push_back(matched_edge(c));
  }
  for (int v = 0; v < nv; ++v) {
    if (g.variable_known(v)) continue;
    DmPart& part = vpart[v] == kUnder ? d.under : vpart[v] == kOver ? d.over : d.just;
    part.variables.push_back(g.variable_root(v));
  }
  for (auto* part : {&d.under, &d.just, &d.over}) {
    std::sort(part->constraints.begin(), part->constraints.end());
    std::sort(part->variables.begin(), part->variables.end());
  }
  d.under.witness = Matching::from_local_edges(g, under_m);
  d.just.witness = Matching::from_local_edges(g, just_m);
  d.over.witness = Matching::from_local_edges(g, over_m);

  // Hall blocks: SCCs of the just part with matched pairs contracted.
  // Dependency arc c -> c' when the variable matched to c also appears in c'.
  {
    const int nj = static_cast<int>(just_constraints_local.size());
    std::vector<int> local_of(nc, -1);
    for (int i = 0; i < nj; ++i) local_of[just_constraints_local[i]] = i;
    DirectedGraph dep(nj, 0);
    for (int i = 0; i < nj; ++i) {
      int c = just_constraints_local[i];
      int v = hk.constraint_match[c];
      for (int e : g.variable_edges(v)) {
        int c2 = g.edge(e).constraint;
        if (c2 != c && local_of[c2] != -1)
          dep.add_arc(i, local_of[c2], false);
      }
    }
    for (const auto& comp : dep.strongly_connected_components()) {
      HallBlock b;
      for (int i : comp) {
        int c = just_constraints_local[i];
        b.constraints.push_back(g.constraint_root(c));
        b.variables.push_back(g.variable_root(hk.constraint_match[c]));
      }
      std::sort(b.constraints.begin(), b.constraints.end());
      std::sort(b.variables.begin(), b.variables.end());
      d.hall_blocks.push_back(std::move(b));
    }
  }
  return d;
}

/// Faultable constraints in the over-constrained part -- the faults that can
/// be detected at all.
inline std::vector<int> detectable_faults(const DMDecomposition& d,
                                          const StructuralModel& model) {
  std::vector<int> out;
  for (int c : d.over.constraints)
    if (model.constraint(c).faultable) out.push_back(c);
  return out;
}

}  // namespace strana
