#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "strana/graph.hpp"

namespace strana {
namespace detail {

inline std::vector<std::string> default_names(const char* prefix, int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back(std::string(prefix) + std::to_string(i));
  return out;
}

inline std::vector<std::string> constraint_names(const StructuralModel& m) {
  std::vector<std::string> out;
  for (const auto& c : m.constraints()) out.push_back(c.id);
  return out;
}

inline std::vector<std::string> variable_names(const StructuralModel& m) {
  std::vector<std::string> out;
  for (const auto& v : m.variables()) out.push_back(v.id);
  return out;
}

}  // namespace detail

/// Undirected structural graph: constraints as boxes, variables as circles,
/// matched edges bold, non-solvable edges dashed.
inline std::string to_dot(const BipartiteGraph& g, const std::vector<std::string>& cnames,
                          const std::vector<std::string>& vnames,
                          const Matching* matching = nullptr) {
  std::vector<char> matched(g.edges().size(), 0);
  if (matching)
    for (int e : matching_local_edges(g, *matching)) matched[e] = 1;
  std::ostringstream out;
  out << "graph structural {\n";
  for (int c = 0; c < g.num_constraints(); ++c)
    out << "  \"" << cnames.at(g.constraint_root(c)) << "\" [shape=box];\n";
  for (int v = 0; v < g.num_variables(); ++v)
    out << "  \"" << vnames.at(g.variable_root(v)) << "\" [shape=circle"
        << (g.variable_known(v) ? ",style=filled" : "") << "];\n";
  for (size_t e = 0; e < g.edges().size(); ++e) {
    const auto& ge = g.edges()[e];
    out << "  \"" << cnames.at(g.constraint_root(ge.constraint)) << "\" -- \""
        << vnames.at(g.variable_root(ge.variable)) << "\" [label=\"" << ge.weight << "\"";
    if (matched[e]) out << ",style=bold";
    else if (!ge.solvable) out << ",style=dashed";
    out << "];\n";
  }
  out << "}\n";
  return out.str();
}

inline std::string to_dot(const BipartiteGraph& g, const StructuralModel& m,
                          const Matching* matching = nullptr) {
  return to_dot(g, detail::constraint_names(m), detail::variable_names(m), matching);
}

/// Directed evaluation graph of a matching.
inline std::string to_dot(const DirectedGraph& d, const BipartiteGraph& g,
                          const std::vector<std::string>& cnames,
                          const std::vector<std::string>& vnames) {
  auto name = [&](int u) {
    return d.is_constraint_vertex(u)
               ? cnames.at(g.constraint_root(d.vertex_constraint(u)))
               : vnames.at(g.variable_root(d.vertex_variable(u)));
  };
  std::ostringstream out;
  out << "digraph evaluation {\n";
  for (int c = 0; c < d.num_constraints(); ++c)
    out << "  \"" << cnames.at(g.constraint_root(c)) << "\" [shape=box];\n";
  for (int v = 0; v < d.num_variables(); ++v)
    out << "  \"" << vnames.at(g.variable_root(v)) << "\" [shape=circle];\n";
  for (const auto& a : d.arcs())
    out << "  \"" << name(a.from) << "\" -> \"" << name(a.to) << "\""
        << (a.matched ? " [style=bold]" : "") << ";\n";
  out << "}\n";
  return out.str();
}

inline std::string to_dot(const DirectedGraph& d, const BipartiteGraph& g,
                          const StructuralModel& m) {
  return to_dot(d, g, detail::constraint_names(m), detail::variable_names(m));
}

}  // namespace strana
