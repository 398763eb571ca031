#pragma once

#include <charconv>
#include <cstdio>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "strana/model.hpp"

namespace strana {

/// Options applied while ingesting a model description. The cost table
/// resolves ops= annotations; noise_k is the factor of the optional additive
/// per-edge surcharge round(noise_k * noise_variance) for edges incident to
/// a noisy variable. Surcharges are baked into edge weights at ingest time.
struct ParseOptions {
  CostTable cost_table;
  double noise_k = 0.0;
};

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

inline bool parse_int(std::string_view s, std::int64_t& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

inline bool parse_double(std::string_view s, double& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

inline OpCounts parse_ops(std::string_view spec, int line) {
  OpCounts ops;
  size_t i = 0;
  while (i < spec.size()) {
    size_t j = spec.find(',', i);
    if (j == std::string_view::npos) j = spec.size();
    std::string_view item = spec.substr(i, j - i);
    std::string_view name = item;
    std::int64_t count = 1;
    if (size_t colon = item.find(':'); colon != std::string_view::npos) {
      name = item.substr(0, colon);
      if (!parse_int(item.substr(colon + 1), count) || count < 0)
        throw ModelError("bad operation count in ops '" + std::string(item) + "'", line);
    }
    auto kind = op_kind_from_string(name);
    if (!kind)
      throw ModelError("unknown operation kind '" + std::string(name) + "'", line);
    ops[*kind] += count;
    i = j + 1;
  }
  return ops;
}

}  // namespace detail

/// Parses the line-structured model text format (see docs/formats.md).
/// Ids must be declared before they are referenced.
inline StructuralModel parse_model(std::string_view text,
                                   const ParseOptions& options = {}) {
  std::vector<Variable> variables;
  std::vector<Constraint> constraints;
  std::vector<ModelEdge> edges;
  std::unordered_map<std::string, int> var_ix, con_ix;
  std::vector<bool> edge_seen;  // (constraint, variable) pairs, linear scan below

  bool header_seen = false;
  int line_no = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (size_t hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    auto tokens = detail::split_ws(line);
    if (tokens.empty()) {
      if (pos > text.size()) break;
      continue;
    }

    if (!header_seen) {
      if (tokens.size() != 2 || tokens[0] != "structural-model" || tokens[1] != "v1")
        throw ModelError("expected header 'structural-model v1'", line_no);
      header_seen = true;
      continue;
    }

    auto attr_of = [&](std::string_view tok) -> std::pair<std::string_view, std::string_view> {
      size_t eq = tok.find('=');
      if (eq == std::string_view::npos) return {tok, {}};
      return {tok.substr(0, eq), tok.substr(eq + 1)};
    };

    if (tokens[0] == "variable") {
      if (tokens.size() < 2) throw ModelError("variable: missing id", line_no);
      Variable v;
      v.id = std::string(tokens[1]);
      if (var_ix.count(v.id)) throw ModelError("duplicate id '" + v.id + "'", line_no);
      for (size_t t = 2; t < tokens.size(); ++t) {
        auto [key, value] = attr_of(tokens[t]);
        if (key == "known" && value.empty()) {
          v.known = true;
        } else if (key == "noise") {
          double nv;
          if (!detail::parse_double(value, nv) || nv < 0)
            throw ModelError("bad noise value '" + std::string(value) + "'", line_no);
          v.noise_variance = nv;
        } else {
          throw ModelError("unknown variable attribute '" + std::string(tokens[t]) + "'",
                           line_no);
        }
      }
      var_ix[v.id] = static_cast<int>(variables.size());
      variables.push_back(std::move(v));
    } else if (tokens[0] == "constraint") {
      if (tokens.size() < 2) throw ModelError("constraint: missing id", line_no);
      Constraint c;
      c.id = std::string(tokens[1]);
      if (con_ix.count(c.id)) throw ModelError("duplicate id '" + c.id + "'", line_no);
      bool kind_seen = false, evalcost_seen = false;
      OpCounts ops;
      bool ops_seen = false;
      for (size_t t = 2; t < tokens.size(); ++t) {
        auto [key, value] = attr_of(tokens[t]);
        if (key == "kind") {
          auto kind = constraint_kind_from_string(value);
          if (!kind)
            throw ModelError("unknown constraint kind '" + std::string(value) + "'",
                             line_no);
          c.kind = *kind;
          kind_seen = true;
        } else if (key == "faultable" && value.empty()) {
          c.faultable = true;
        } else if (key == "evalcost") {
          std::int64_t ec;
          if (!detail::parse_int(value, ec))
            throw ModelError("bad evalcost '" + std::string(value) + "'", line_no);
          c.eval_cost = ec;
          evalcost_seen = true;
        } else if (key == "ops") {
          ops = detail::parse_ops(value, line_no);
          ops_seen = true;
        } else {
          throw ModelError("unknown constraint attribute '" + std::string(tokens[t]) + "'",
                           line_no);
        }
      }
      if (!kind_seen) throw ModelError("constraint '" + c.id + "' missing kind=", line_no);
      if (!evalcost_seen)
        c.eval_cost = ops_seen ? edge_weight_from_ops(ops, options.cost_table) : 1;
      con_ix[c.id] = static_cast<int>(constraints.size());
      constraints.push_back(std::move(c));
    } else if (tokens[0] == "edge") {
      if (tokens.size() < 3) throw ModelError("edge: expected constraint and variable ids",
                                              line_no);
      ModelEdge e;
      auto cit = con_ix.find(std::string(tokens[1]));
      if (cit == con_ix.end())
        throw ModelError("unknown id reference '" + std::string(tokens[1]) + "'", line_no);
      auto vit = var_ix.find(std::string(tokens[2]));
      if (vit == var_ix.end())
        throw ModelError("unknown id reference '" + std::string(tokens[2]) + "'", line_no);
      e.constraint = cit->second;
      e.variable = vit->second;
      bool weight_seen = false, ops_seen = false;
      OpCounts ops;
      for (size_t t = 3; t < tokens.size(); ++t) {
        auto [key, value] = attr_of(tokens[t]);
        if (key == "weight") {
          std::int64_t w;
          if (!detail::parse_int(value, w))
            throw ModelError("bad weight '" + std::string(value) + "'", line_no);
          if (w < 0) throw ModelError("negative weight", line_no);
          e.weight = w;
          weight_seen = true;
        } else if (key == "ops") {
          ops = detail::parse_ops(value, line_no);
          ops_seen = true;
        } else if (key == "unsolvable" && value.empty()) {
          e.solvable = false;
        } else if (key == "role") {
          if (value == "derivative") e.role = DynamicRole::derivative;
          else if (value == "integral") e.role = DynamicRole::integral;
          else
            throw ModelError("unknown role '" + std::string(value) + "'", line_no);
        } else {
          throw ModelError("unknown edge attribute '" + std::string(tokens[t]) + "'",
                           line_no);
        }
      }
      if (weight_seen && ops_seen)
        throw ModelError("edge has both weight= and ops=", line_no);
      if (!weight_seen) {
        if (ops_seen) {
          e.weight = edge_weight_from_ops(ops, options.cost_table);
        } else if (e.role == DynamicRole::derivative) {
          e.weight = options.cost_table.differentiation;
        } else if (e.role == DynamicRole::integral) {
          e.weight = options.cost_table.integration;
        } else {
          e.weight = 1;
        }
      }
      for (const auto& prev : edges)
        if (prev.constraint == e.constraint && prev.variable == e.variable)
          throw ModelError("duplicate edge " + std::string(tokens[1]) + " -- " +
                               std::string(tokens[2]),
                           line_no);
      if (options.noise_k != 0.0) {
        const auto& nv = variables[e.variable].noise_variance;
        if (nv) e.weight += static_cast<Cost>(std::llround(options.noise_k * *nv));
      }
      edges.push_back(e);
    } else {
      throw ModelError("unknown directive '" + std::string(tokens[0]) + "'", line_no);
    }
    if (pos > text.size()) break;
  }
  if (!header_seen) throw ModelError("empty model: missing 'structural-model v1' header", 1);
  return StructuralModel::build(std::move(variables), std::move(constraints),
                                std::move(edges));
}

/// Canonical text serialization: sorted ids, every attribute explicit.
/// parse_model(serialize_model(m)) == m with default options.
inline std::string serialize_model(const StructuralModel& m) {
  std::ostringstream out;
  out << "structural-model v1\n";
  for (const auto& v : m.variables()) {
    out << "variable " << v.id;
    if (v.known) out << " known";
    if (v.noise_variance) out << " noise=" << detail::format_double(*v.noise_variance);
    out << "\n";
  }
  for (const auto& c : m.constraints()) {
    out << "constraint " << c.id << " kind=" << to_string(c.kind);
    if (c.faultable) out << " faultable";
    out << " evalcost=" << c.eval_cost << "\n";
  }
  for (const auto& e : m.edges()) {
    out << "edge " << m.constraint(e.constraint).id << " " << m.variable(e.variable).id
        << " weight=" << e.weight;
    if (!e.solvable) out << " unsolvable";
    if (e.role != DynamicRole::none) out << " role=" << to_string(e.role);
    out << "\n";
  }
  return out.str();
}

inline nlohmann::json model_to_json(const StructuralModel& m) {
  nlohmann::json j;
  j["schema"] = "strana-model-v1";
  j["variables"] = nlohmann::json::array();
  for (const auto& v : m.variables()) {
    nlohmann::json jv{{"id", v.id}, {"known", v.known}};
    if (v.noise_variance) jv["noise"] = *v.noise_variance;
    j["variables"].push_back(std::move(jv));
  }
  j["constraints"] = nlohmann::json::array();
  for (const auto& c : m.constraints())
    j["constraints"].push_back({{"id", c.id},
                                {"kind", to_string(c.kind)},
                                {"faultable", c.faultable},
                                {"evalcost", c.eval_cost}});
  j["edges"] = nlohmann::json::array();
  for (const auto& e : m.edges()) {
    nlohmann::json je{{"constraint", m.constraint(e.constraint).id},
                      {"variable", m.variable(e.variable).id},
                      {"weight", e.weight},
                      {"solvable", e.solvable}};
    if (e.role != DynamicRole::none) je["role"] = to_string(e.role);
    j["edges"].push_back(std::move(je));
  }
  return j;
}

/// JSON import of the canonical schema. Weights are taken as stored; no
/// noise surcharge is reapplied.
inline StructuralModel model_from_json(const nlohmann::json& j) {
  if (!j.is_object() || j.value("schema", "") != "strana-model-v1")
    throw ModelError("expected schema strana-model-v1");
  std::vector<Variable> variables;
  std::vector<Constraint> constraints;
  std::vector<ModelEdge> edges;
  std::unordered_map<std::string, int> var_ix, con_ix;
  try {
    for (const auto& jv : j.at("variables")) {
      Variable v;
      v.id = jv.at("id").get<std::string>();
      v.known = jv.value("known", false);
      if (jv.contains("noise")) v.noise_variance = jv.at("noise").get<double>();
      var_ix[v.id] = static_cast<int>(variables.size());
      variables.push_back(std::move(v));
    }
    for (const auto& jc : j.at("constraints")) {
      Constraint c;
      c.id = jc.at("id").get<std::string>();
      auto kind = constraint_kind_from_string(jc.at("kind").get<std::string>());
      if (!kind) throw ModelError("unknown constraint kind in JSON model");
      c.kind = *kind;
      c.faultable = jc.value("faultable", false);
      c.eval_cost = jc.value("evalcost", Cost{1});
      con_ix[c.id] = static_cast<int>(constraints.size());
      constraints.push_back(std::move(c));
    }
    for (const auto& je : j.at("edges")) {
      ModelEdge e;
      auto cid = je.at("constraint").get<std::string>();
      auto vid = je.at("variable").get<std::string>();
      auto cit = con_ix.find(cid);
      auto vit = var_ix.find(vid);
      if (cit == con_ix.end()) throw ModelError("unknown id reference '" + cid + "'");
      if (vit == var_ix.end()) throw ModelError("unknown id reference '" + vid + "'");
      e.constraint = cit->second;
      e.variable = vit->second;
      e.weight = je.value("weight", Cost{1});
      e.solvable = je.value("solvable", true);
      if (je.contains("role")) {
        auto role = je.at("role").get<std::string>();
        if (role == "derivative") e.role = DynamicRole::derivative;
        else if (role == "integral") e.role = DynamicRole::integral;
        else if (role != "none") throw ModelError("unknown role '" + role + "'");
      }
      edges.push_back(e);
    }
  } catch (const nlohmann::json::exception& ex) {
    throw ModelError(std::string("malformed model JSON: ") + ex.what());
  }
  return StructuralModel::build(std::move(variables), std::move(constraints),
                                std::move(edges));
}

}  // namespace strana
