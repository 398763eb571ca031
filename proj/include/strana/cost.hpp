#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace strana {

/// Integer cost units. All weights, eval costs and matching totals are exact
/// integers so that orderings have no floating-point ties.
using Cost = std::int64_t;

enum class OpKind {
  add_sub,
  mul,
  div,
  trig_pow_root,
  integration,
  differentiation,
};

inline constexpr std::array<OpKind, 6> kAllOpKinds = {
    OpKind::add_sub,       OpKind::mul,         OpKind::div,
    OpKind::trig_pow_root, OpKind::integration, OpKind::differentiation,
};

inline const char* to_string(OpKind k) {
  switch (k) {
    case OpKind::add_sub: return "add";
    case OpKind::mul: return "mul";
    case OpKind::div: return "div";
    case OpKind::trig_pow_root: return "trig";
    case OpKind::integration: return "integ";
    case OpKind::differentiation: return "diff";
  }
  return "?";
}

/// Accepts the canonical names plus common aliases (sub -> add, pow/root/sqrt
/// -> trig, integration/differentiation spelled out).
inline std::optional<OpKind> op_kind_from_string(std::string_view s) {
  if (s == "add" || s == "sub" || s == "add_sub") return OpKind::add_sub;
  if (s == "mul") return OpKind::mul;
  if (s == "div") return OpKind::div;
  if (s == "trig" || s == "pow" || s == "root" || s == "sqrt" ||
      s == "trig_pow_root")
    return OpKind::trig_pow_root;
  if (s == "integ" || s == "int" || s == "integration") return OpKind::integration;
  if (s == "diff" || s == "differentiation") return OpKind::differentiation;
  return std::nullopt;
}

/// Multiset of primitive operations: kind -> occurrence count.
using OpCounts = std::map<OpKind, std::int64_t>;

/// Per-operation cost units used to derive edge weights and eval costs.
struct CostTable {
  Cost add_sub = 1;
  Cost mul = 5;
  Cost div = 10;
  Cost trig_pow_root = 100;
  Cost integration = 100;
  Cost differentiation = 200;

  Cost of(OpKind k) const {
    switch (k) {
      case OpKind::add_sub: return add_sub;
      case OpKind::mul: return mul;
      case OpKind::div: return div;
      case OpKind::trig_pow_root: return trig_pow_root;
      case OpKind::integration: return integration;
      case OpKind::differentiation: return differentiation;
    }
    return 0;
  }

  bool operator==(const CostTable&) const = default;
};

inline Cost edge_weight_from_ops(const OpCounts& ops, const CostTable& table) {
  Cost total = 0;
  for (const auto& [kind, count] : ops) total += table.of(kind) * count;
  return total;
}

/// Solver capabilities available to the FDI runtime. Flags are independent:
/// a differential-equation solver does not imply a standalone differentiator.
struct ToolSet {
  bool differentiator = false;
  bool integrator = false;
  bool linear_solver = false;
  bool nonlinear_solver = false;
  bool differential_equation_solver = false;

  static ToolSet all() { return {true, true, true, true, true}; }
  static ToolSet none() { return {}; }

  bool operator==(const ToolSet&) const = default;
};

}  // namespace strana
