#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "strana/cost.hpp"

namespace strana {

enum class ConstraintKind { algebraic_linear, algebraic_nonlinear, differential };

inline const char* to_string(ConstraintKind k) {
  switch (k) {
    case ConstraintKind::algebraic_linear: return "linear";
    case ConstraintKind::algebraic_nonlinear: return "nonlinear";
    case ConstraintKind::differential: return "differential";
  }
  return "?";
}

inline std::optional<ConstraintKind> constraint_kind_from_string(std::string_view s) {
  if (s == "linear") return ConstraintKind::algebraic_linear;
  if (s == "nonlinear") return ConstraintKind::algebraic_nonlinear;
  if (s == "differential") return ConstraintKind::differential;
  return std::nullopt;
}

/// Role of an edge of a differentiation constraint: matching the derivative
/// variable means numerically differentiating, matching the integrated
/// variable means numerically integrating.
enum class DynamicRole { none, derivative, integral };

inline const char* to_string(DynamicRole r) {
  switch (r) {
    case DynamicRole::none: return "none";
    case DynamicRole::derivative: return "derivative";
    case DynamicRole::integral: return "integral";
  }
  return "?";
}

struct Variable {
  std::string id;
  bool known = false;
  std::optional<double> noise_variance;  // relative scale, known variables only

  bool operator==(const Variable&) const = default;
};

struct Constraint {
  std::string id;
  ConstraintKind kind = ConstraintKind::algebraic_linear;
  bool faultable = false;
  Cost eval_cost = 1;  // cost of evaluating the constraint as a residual

  bool operator==(const Constraint&) const = default;
};

struct ModelEdge {
  int constraint = -1;  // index into StructuralModel::constraints
  int variable = -1;    // index into StructuralModel::variables
  Cost weight = 1;      // cost of solving the constraint for this variable
  bool solvable = true;
  DynamicRole role = DynamicRole::none;

  bool operator==(const ModelEdge&) const = default;
};

/// Raised on any model ingestion or validation problem. `line` is 1-based
/// when the error originates from a text model file, 0 otherwise.
class ModelError : public std::runtime_error {
 public:
  explicit ModelError(const std::string& what, int line = 0, int column = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) +
                                          (column > 0 ? ":" + std::to_string(column) : "") +
                                          ": " + what
                                    : what),
        line(line),
        column(column) {}

  int line = 0;
  int column = 0;
};

/// Validated structural model: constraints, variables and annotated edges.
/// Canonical form: variables and constraints sorted by id, edges sorted by
/// (constraint, variable). All tie-breaking in the pipeline is by these
/// canonical indices, which makes results independent of declaration order.
class StructuralModel {
 public:
  StructuralModel() = default;

  /// Canonicalizes and validates; throws ModelError on any violation.
  static StructuralModel build(std::vector<Variable> variables,
                               std::vector<Constraint> constraints,
                               std::vector<ModelEdge> edges) {
    StructuralModel m;
    m.variables_ = std::move(variables);
    m.constraints_ = std::move(constraints);
    m.edges_ = std::move(edges);
    m.canonicalize();
    m.validate();
    m.index();
    return m;
  }

  const std::vector<Variable>& variables() const { return variables_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  const std::vector<ModelEdge>& edges() const { return edges_; }

  int variable_index(std::string_view id) const {
    auto it = variable_by_id_.find(std::string(id));
    return it == variable_by_id_.end() ? -1 : it->second;
  }
  int constraint_index(std::string_view id) const {
    auto it = constraint_by_id_.find(std::string(id));
    return it == constraint_by_id_.end() ? -1 : it->second;
  }

  const Variable& variable(int i) const { return variables_.at(i); }
  const Constraint& constraint(int i) const { return constraints_.at(i); }

  int num_unknowns() const {
    int n = 0;
    for (const auto& v : variables_) n += v.known ? 0 : 1;
    return n;
  }

  std::vector<int> faultable_constraints() const {
    std::vector<int> out;
    for (int i = 0; i < static_cast<int>(constraints_.size()); ++i)
      if (constraints_[i].faultable) out.push_back(i);
    return out;
  }

  bool operator==(const StructuralModel& other) const {
    return variables_ == other.variables_ && constraints_ == other.constraints_ &&
           edges_ == other.edges_;
  }

 private:
  void canonicalize() {
    std::vector<int> vperm(variables_.size()), cperm(constraints_.size());
    auto sort_perm = [](auto& items, std::vector<int>& perm) {
      std::vector<int> order(items.size());
      for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
      std::stable_sort(order.begin(), order.end(),
                       [&](int a, int b) { return items[a].id < items[b].id; });
      auto sorted = items;
      for (size_t i = 0; i < order.size(); ++i) {
        sorted[i] = items[order[i]];
        perm[order[i]] = static_cast<int>(i);
      }
      items = std::move(sorted);
    };
    sort_perm(variables_, vperm);
    sort_perm(constraints_, cperm);
    for (auto& e : edges_) {
      if (e.constraint >= 0 && e.constraint < static_cast<int>(cperm.size()))
        e.constraint = cperm[e.constraint];
      if (e.variable >= 0 && e.variable < static_cast<int>(vperm.size()))
        e.variable = vperm[e.variable];
    }
    std::sort(edges_.begin(), edges_.end(), [](const ModelEdge& a, const ModelEdge& b) {
      return std::pair(a.constraint, a.variable) < std::pair(b.constraint, b.variable);
    });
  }

  void validate() const {
    for (size_t i = 1; i < variables_.size(); ++i)
      if (variables_[i].id == variables_[i - 1].id)
        throw ModelError("duplicate variable id '" + variables_[i].id + "'");
    for (size_t i = 1; i < constraints_.size(); ++i)
      if (constraints_[i].id == constraints_[i - 1].id)
        throw ModelError("duplicate constraint id '" + constraints_[i].id + "'");
    for (const auto& v : variables_)
      if (v.noise_variance && *v.noise_variance < 0)
        throw ModelError("negative noise variance on variable '" + v.id + "'");
    for (const auto& c : constraints_)
      if (c.eval_cost < 0)
        throw ModelError("negative eval cost on constraint '" + c.id + "'");

    std::vector<int> deriv_edges(constraints_.size(), 0);
    std::vector<int> integ_edges(constraints_.size(), 0);
    std::vector<int> plain_edges(constraints_.size(), 0);
    for (size_t i = 0; i < edges_.size(); ++i) {
      const ModelEdge& e = edges_[i];
      if (e.constraint < 0 || e.constraint >= static_cast<int>(constraints_.size()))
        throw ModelError("edge references unknown constraint");
      if (e.variable < 0 || e.variable >= static_cast<int>(variables_.size()))
        throw ModelError("edge references unknown variable");
      if (e.weight < 0)
        throw ModelError("negative weight on edge " + constraints_[e.constraint].id +
                         " -- " + variables_[e.variable].id);
      if (i > 0 && edges_[i].constraint == edges_[i - 1].constraint &&
          edges_[i].variable == edges_[i - 1].variable)
        throw ModelError("duplicate edge " + constraints_[e.constraint].id + " -- " +
                         variables_[e.variable].id);
      const bool differential =
          constraints_[e.constraint].kind == ConstraintKind::differential;
      if (e.role != DynamicRole::none && !differential)
        throw ModelError("dynamic role on edge of non-differential constraint '" +
                         constraints_[e.constraint].id + "'");
      if (e.role == DynamicRole::derivative) ++deriv_edges[e.constraint];
      if (e.role == DynamicRole::integral) ++integ_edges[e.constraint];
      if (e.role == DynamicRole::none) ++plain_edges[e.constraint];
    }
    for (size_t c = 0; c < constraints_.size(); ++c) {
      if (constraints_[c].kind != ConstraintKind::differential) continue;
      if (deriv_edges[c] != 1 || integ_edges[c] != 1 || plain_edges[c] != 0)
        throw ModelError("differential constraint '" + constraints_[c].id +
                         "' must have exactly one derivative-role and one "
                         "integral-role edge");
    }
  }

  void index() {
    variable_by_id_.clear();
    constraint_by_id_.clear();
    for (size_t i = 0; i < variables_.size(); ++i)
      variable_by_id_[variables_[i].id] = static_cast<int>(i);
    for (size_t i = 0; i < constraints_.size(); ++i)
      constraint_by_id_[constraints_[i].id] = static_cast<int>(i);
  }

  std::vector<Variable> variables_;
  std::vector<Constraint> constraints_;
  std::vector<ModelEdge> edges_;
  std::unordered_map<std::string, int> variable_by_id_;
  std::unordered_map<std::string, int> constraint_by_id_;
};

}  // namespace strana
