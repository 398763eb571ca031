#pragma once

#include <algorithm>
#include <cassert>
#include <queue>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "strana/model.hpp"

namespace strana {

struct GraphEdge {
  int constraint = -1;  // local constraint index
  int variable = -1;    // local variable index
  Cost weight = 1;
  bool solvable = true;
  DynamicRole role = DynamicRole::none;
};

/// Index-based undirected bipartite structural graph. Vertices map back to
/// "root" indices (model indices for graphs built from a model, identity for
/// graphs built raw); induced subgraphs keep the root mapping so results can
/// always be reported in model terms.
class BipartiteGraph {
 public:
  BipartiteGraph() = default;

  static BipartiteGraph from_model(const StructuralModel& m) {
    BipartiteGraph g;
    g.constraint_root_.resize(m.constraints().size());
    g.constraint_kind_.resize(m.constraints().size());
    for (size_t i = 0; i < m.constraints().size(); ++i) {
      g.constraint_root_[i] = static_cast<int>(i);
      g.constraint_kind_[i] = m.constraints()[i].kind;
    }
    g.variable_root_.resize(m.variables().size());
    g.variable_known_.resize(m.variables().size());
    for (size_t i = 0; i < m.variables().size(); ++i) {
      g.variable_root_[i] = static_cast<int>(i);
      g.variable_known_[i] = m.variables()[i].known;
    }
    for (const auto& e : m.edges())
      g.edges_.push_back({e.constraint, e.variable, e.weight, e.solvable, e.role});
    g.build_adjacency();
    return g;
  }

  /// Raw construction for tests and generators; root indices are identity.
  static BipartiteGraph build(int num_constraints, int num_variables,
                              std::vector<bool> variable_known,
                              std::vector<GraphEdge> edges,
                              std::vector<ConstraintKind> kinds = {}) {
    BipartiteGraph g;
    g.constraint_root_.resize(num_constraints);
    for (int i = 0; i < num_constraints; ++i) g.constraint_root_[i] = i;
    if (kinds.empty()) kinds.assign(num_constraints, ConstraintKind::algebraic_linear);
    if (static_cast<int>(kinds.size()) != num_constraints)
      throw std::invalid_argument("constraint kinds size mismatch");
    g.constraint_kind_ = std::move(kinds);
    g.variable_root_.resize(num_variables);
    for (int i = 0; i < num_variables; ++i) g.variable_root_[i] = i;
    if (variable_known.empty()) variable_known.assign(num_variables, false);
    if (static_cast<int>(variable_known.size()) != num_variables)
      throw std::invalid_argument("variable_known size mismatch");
    g.variable_known_ = std::move(variable_known);
    for (const auto& e : edges) {
      if (e.constraint < 0 || e.constraint >= num_constraints || e.variable < 0 ||
          e.variable >= num_variables)
        throw std::invalid_argument("edge endpoint out of range");
      g.edges_.push_back(e);
    }
    g.build_adjacency();
    return g;
  }

  int num_constraints() const { return static_cast<int>(constraint_root_.size()); }
  int num_variables() const { return static_cast<int>(variable_root_.size()); }
  int num_unknowns() const {
    int n = 0;
    for (bool k : variable_known_) n += k ? 0 : 1;
    return n;
  }

  const std::vector<GraphEdge>& edges() const { return edges_; }
  const GraphEdge& edge(int e) const { return edges_.at(e); }
  const std::vector<int>& constraint_edges(int c) const { return constraint_edges_.at(c); }
  const std::vector<int>& variable_edges(int v) const { return variable_edges_.at(v); }

  bool variable_known(int v) const { return variable_known_.at(v); }
  int constraint_root(int c) const { return constraint_root_.at(c); }
  int variable_root(int v) const { return variable_root_.at(v); }
  ConstraintKind constraint_kind(int c) const { return constraint_kind_.at(c); }

  /// Local index of the root constraint/variable, or -1 if not present.
  int constraint_local(int root) const {
    for (int i = 0; i < num_constraints(); ++i)
      if (constraint_root_[i] == root) return i;
    return -1;
  }
  int variable_local(int root) const {
    for (int i = 0; i < num_variables(); ++i)
      if (variable_root_[i] == root) return i;
    return -1;
  }

  int find_edge(int c, int v) const {
    for (int e : constraint_edges_.at(c))
      if (edges_[e].variable == v) return e;
    return -1;
  }

  std::vector<int> unknown_variables() const {
    std::vector<int> out;
    for (int v = 0; v < num_variables(); ++v)
      if (!variable_known_[v]) out.push_back(v);
    return out;
  }

  /// Number of unknown variables incident to a constraint (all edges count:
  /// a constraint cannot be evaluated while any incident variable is unknown,
  /// whether or not the edge is invertible).
  int unknown_degree(int c) const {
    int n = 0;
    for (int e : constraint_edges_.at(c)) n += variable_known_[edges_[e].variable] ? 0 : 1;
    return n;
  }

  /// Induced subgraph over the given local constraints. Variables are those
  /// incident to the kept constraints; `make_known_roots` marks variables
  /// (by root index) as known in the result.
  BipartiteGraph induced(const std::vector<int>& constraints,
                         const std::vector<int>& make_known_roots = {}) const {
    BipartiteGraph g;
    std::vector<int> cmap(num_constraints(), -1);
    std::vector<int> sorted = constraints;
    std::sort(sorted.begin(), sorted.end());
    for (int c : sorted) {
      if (c < 0 || c >= num_constraints()) throw std::invalid_argument("bad constraint");
      if (cmap[c] != -1) continue;
      cmap[c] = static_cast<int>(g.constraint_root_.size());
      g.constraint_root_.push_back(constraint_root_[c]);
      g.constraint_kind_.push_back(constraint_kind_[c]);
    }
    std::vector<int> vmap(num_variables(), -1);
    for (int c = 0; c < num_constraints(); ++c) {
      if (cmap[c] == -1) continue;
      for (int e : constraint_edges_[c]) {
        int v = edges_[e].variable;
        if (vmap[v] != -1) continue;
        vmap[v] = static_cast<int>(g.variable_root_.size());
        g.variable_root_.push_back(variable_root_[v]);
        g.variable_known_.push_back(variable_known_[v]);
      }
    }
    for (int root : make_known_roots)
      for (int v = 0; v < static_cast<int>(g.variable_root_.size()); ++v)
        if (g.variable_root_[v] == root) g.variable_known_[v] = true;
    for (const auto& e : edges_) {
      if (cmap[e.constraint] == -1) continue;
      GraphEdge ne = e;
      ne.constraint = cmap[e.constraint];
      ne.variable = vmap[e.variable];
      g.edges_.push_back(ne);
    }
    g.build_adjacency();
    return g;
  }

 private:
  void build_adjacency() {
    constraint_edges_.assign(constraint_root_.size(), {});
    variable_edges_.assign(variable_root_.size(), {});
    for (size_t e = 0; e < edges_.size(); ++e) {
      constraint_edges_[edges_[e].constraint].push_back(static_cast<int>(e));
      variable_edges_[edges_[e].variable].push_back(static_cast<int>(e));
    }
  }

  std::vector<int> constraint_root_;
  std::vector<ConstraintKind> constraint_kind_;
  std::vector<int> variable_root_;
  std::vector<bool> variable_known_;
  std::vector<GraphEdge> edges_;
  std::vector<std::vector<int>> constraint_edges_;
  std::vector<std::vector<int>> variable_edges_;
};

/// A matching as root-index (constraint, variable) pairs plus its total
/// weight. Root pairs make matchings portable across induced subgraphs.
struct MatchedPair {
  int constraint = -1;  // root index
  int variable = -1;    // root index

  friend bool operator==(const MatchedPair& a, const MatchedPair& b) = default;
  friend bool operator<(const MatchedPair& a, const MatchedPair& b) {
    return std::pair(a.constraint, a.variable) < std::pair(b.constraint, b.variable);
  }
};

struct Matching {
  std::vector<MatchedPair> pairs;  // sorted
  Cost total_weight = 0;

  int size() const { return static_cast<int>(pairs.size()); }
  bool operator==(const Matching&) const = default;

  static Matching from_local_edges(const BipartiteGraph& g, std::vector<int> edge_ids) {
    Matching m;
    for (int e : edge_ids) {
      const auto& ge = g.edge(e);
      m.pairs.push_back({g.constraint_root(ge.constraint), g.variable_root(ge.variable)});
      m.total_weight += ge.weight;
    }
    std::sort(m.pairs.begin(), m.pairs.end());
    return m;
  }

  /// Union of disjoint matchings.
  static Matching merged(const Matching& a, const Matching& b) {
    Matching m = a;
    m.pairs.insert(m.pairs.end(), b.pairs.begin(), b.pairs.end());
    m.total_weight += b.total_weight;
    std::sort(m.pairs.begin(), m.pairs.end());
    return m;
  }
};

/// Checks the matching against the graph: every pair must be a solvable edge
/// of g and no vertex may repeat. Throws std::invalid_argument otherwise.
/// Pairs whose endpoints are not in g at all are rejected too.
inline std::vector<int> matching_local_edges(const BipartiteGraph& g, const Matching& m) {
  std::vector<int> local;
  std::vector<char> cused(g.num_constraints(), 0), vused(g.num_variables(), 0);
  for (const auto& p : m.pairs) {
    int c = g.constraint_local(p.constraint);
    int v = g.variable_local(p.variable);
    int e = (c >= 0 && v >= 0) ? g.find_edge(c, v) : -1;
    if (e < 0) throw std::invalid_argument("matching contains an edge not in the graph");
    if (!g.edge(e).solvable)
      throw std::invalid_argument("matching contains a non-solvable edge");
    if (cused[c] || vused[v])
      throw std::invalid_argument("matching edges share a vertex");
    cused[c] = vused[v] = 1;
    local.push_back(e);
  }
  return local;
}

/// Restriction of a matching to the edges present in g (for evaluating a
/// global matching against an induced subgraph).
inline Matching restrict_matching(const BipartiteGraph& g, const Matching& m) {
  Matching out;
  for (const auto& p : m.pairs) {
    int c = g.constraint_local(p.constraint);
    int v = g.variable_local(p.variable);
    if (c < 0 || v < 0) continue;
    int e = g.find_edge(c, v);
    if (e < 0) continue;
    out.pairs.push_back(p);
    out.total_weight += g.edge(e).weight;
  }
  return out;
}

/// Directed evaluation graph: same vertices as the source bipartite graph,
/// matched edges directed constraint->variable, all others variable->constraint.
/// Vertex encoding: constraint c -> c, variable v -> num_constraints + v.
class DirectedGraph {
 public:
  struct Arc {
    int from = -1;
    int to = -1;
    bool matched = false;
  };

  DirectedGraph(int num_constraints, int num_variables)
      : nc_(num_constraints), nv_(num_variables), out_(num_constraints + num_variables) {}

  int num_constraints() const { return nc_; }
  int num_variables() const { return nv_; }
  int num_vertices() const { return nc_ + nv_; }
  int constraint_vertex(int c) const { return c; }
  int variable_vertex(int v) const { return nc_ + v; }
  bool is_constraint_vertex(int u) const { return u < nc_; }
  int vertex_constraint(int u) const { return u; }
  int vertex_variable(int u) const { return u - nc_; }

  const std::vector<Arc>& arcs() const { return arcs_; }
  const std::vector<int>& out(int u) const { return out_.at(u); }

  void add_arc(int from, int to, bool matched) {
    out_[from].push_back(static_cast<int>(arcs_.size()));
    arcs_.push_back({from, to, matched});
  }

  DirectedGraph reversed() const {
    DirectedGraph r(nc_, nv_);
    for (const auto& a : arcs_) r.add_arc(a.to, a.from, a.matched);
    return r;
  }

  /// All vertices reachable from the sources by directed paths, sources
  /// included. Returns a sorted vertex list.
  std::vector<int> reachable_from(const std::vector<int>& sources) const {
    std::vector<char> seen(num_vertices(), 0);
    std::vector<int> stack;
    for (int s : sources) {
      if (s < 0 || s >= num_vertices()) throw std::invalid_argument("bad source vertex");
      if (!seen[s]) {
        seen[s] = 1;
        stack.push_back(s);
      }
    }
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int a : out_[u]) {
        int w = arcs_[a].to;
        if (!seen[w]) {
          seen[w] = 1;
          stack.push_back(w);
        }
      }
    }
    std::vector<int> result;
    for (int u = 0; u < num_vertices(); ++u)
      if (seen[u]) result.push_back(u);
    return result;
  }

  /// Strongly connected components in dependency-first order: if any arc
  /// leads from component A to component B, A is listed before B. Ties are
  /// broken toward the component with the smallest vertex index, so the
  /// order doubles as a deterministic evaluation order.
  std::vector<std::vector<int>> strongly_connected_components() const {
    const int n = num_vertices();
    // Iterative Tarjan.
    std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
    std::vector<char> on_stack(n, 0);
    std::vector<int> stack;
    std::vector<std::vector<int>> comps;
    int next_index = 0;

    struct Frame {
      int v;
      size_t edge;
    };
    for (int root = 0; root < n; ++root) {
      if (index[root] != -1) continue;
      std::vector<Frame> call;
      call.push_back({root, 0});
      index[root] = low[root] = next_index++;
      stack.push_back(root);
      on_stack[root] = 1;
      while (!call.empty()) {
        Frame& f = call.back();
        if (f.edge < out_[f.v].size()) {
          int w = arcs_[out_[f.v][f.edge++]].to;
          if (index[w] == -1) {
            index[w] = low[w] = next_index++;
            stack.push_back(w);
            on_stack[w] = 1;
            call.push_back({w, 0});
          } else if (on_stack[w]) {
            low[f.v] = std::min(low[f.v], index[w]);
          }
        } else {
          int v = f.v;
          call.pop_back();
          if (low[v] == index[v]) {
            std::vector<int> c;
            while (true) {
              int w = stack.back();
              stack.pop_back();
              on_stack[w] = 0;
              comp[w] = static_cast<int>(comps.size());
              c.push_back(w);
              if (w == v) break;
            }
            std::sort(c.begin(), c.end());
            comps.push_back(std::move(c));
          }
          if (!call.empty()) {
            int parent = call.back().v;
            low[parent] = std::min(low[parent], low[v]);
          }
        }
      }
    }

    // Kahn order on the condensation, min-vertex-key tie-break.
    const int k = static_cast<int>(comps.size());
    std::vector<std::vector<int>> succ(k);
    std::vector<int> indeg(k, 0);
    for (const auto& a : arcs_) {
      int cu = comp[a.from], cv = comp[a.to];
      if (cu != cv) succ[cu].push_back(cv);
    }
    for (auto& s : succ) {
      std::sort(s.begin(), s.end());
      s.erase(std::unique(s.begin(), s.end()), s.end());
      for (int t : s) ++indeg[t];
    }
    auto key = [&](int c) { return comps[c].front(); };
    std::priority_queue<std::pair<int, int>, std::vector<std::pair<int, int>>,
                        std::greater<>>
        ready;
    for (int c = 0; c < k; ++c)
      if (indeg[c] == 0) ready.push({key(c), c});
    std::vector<std::vector<int>> ordered;
    ordered.reserve(k);
    while (!ready.empty()) {
      int c = ready.top().second;
      ready.pop();
      ordered.push_back(comps[c]);
      for (int t : succ[c])
        if (--indeg[t] == 0) ready.push({key(t), t});
    }
    assert(static_cast<int>(ordered.size()) == k);
    return ordered;
  }

 private:
  int nc_ = 0, nv_ = 0;
  std::vector<Arc> arcs_;
  std::vector<std::vector<int>> out_;
};

/// Orients g along a matching: matched edges constraint->variable, everything
/// else variable->constraint. Throws if m is not a valid matching of g.
inline DirectedGraph orient(const BipartiteGraph& g, const Matching& m) {
  std::vector<int> local = matching_local_edges(g, m);
  std::vector<char> matched(g.edges().size(), 0);
  for (int e : local) matched[e] = 1;
  DirectedGraph d(g.num_constraints(), g.num_variables());
  for (size_t e = 0; e < g.edges().size(); ++e) {
    const auto& ge = g.edges()[e];
    if (matched[e])
      d.add_arc(d.constraint_vertex(ge.constraint), d.variable_vertex(ge.variable), true);
    else
      d.add_arc(d.variable_vertex(ge.variable), d.constraint_vertex(ge.constraint), false);
  }
  return d;
}

enum class BiadjacencyColumns { all_variables, unknown_only };

struct Biadjacency {
  std::vector<int> columns;  // local variable index per column
  std::vector<std::vector<unsigned char>> a;  // a[row][col], rows = constraints
};

/// Structural biadjacency: a_ij = 1 iff the edge exists (solvable or not).
inline Biadjacency biadjacency(const BipartiteGraph& g,
                               BiadjacencyColumns columns = BiadjacencyColumns::all_variables) {
  Biadjacency b;
  std::vector<int> col_of(g.num_variables(), -1);
  for (int v = 0; v < g.num_variables(); ++v) {
    if (columns == BiadjacencyColumns::unknown_only && g.variable_known(v)) continue;
    col_of[v] = static_cast<int>(b.columns.size());
    b.columns.push_back(v);
  }
  b.a.assign(g.num_constraints(),
             std::vector<unsigned char>(b.columns.size(), 0));
  for (const auto& e : g.edges())
    if (col_of[e.variable] >= 0) b.a[e.constraint][col_of[e.variable]] = 1;
  return b;
}

}  // namespace strana
