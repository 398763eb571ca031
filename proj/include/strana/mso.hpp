#pragma once

#include <atomic>
#include <cstdint>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <unordered_set>
#include <vector>

#include "strana/dm.hpp"
#include "strana/matching.hpp"

namespace strana {
namespace detail {

/// Compact constraint-set key for memoization.
class DynBitset {
 public:
  DynBitset() = default;
  explicit DynBitset(int bits) : bits_(bits), words_((bits + 63) / 64, 0) {}

  void set(int i) { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }
  void reset(int i) { words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }
  bool test(int i) const { return (words_[i >> 6] >> (i & 63)) & 1; }
  int size() const { return bits_; }

  int count() const {
    int n = 0;
    for (auto w : words_) n += __builtin_popcountll(w);
    return n;
  }
  bool any() const {
    for (auto w : words_)
      if (w) return true;
    return false;
  }
  std::vector<int> to_vector() const {
    std::vector<int> out;
    for (int i = 0; i < bits_; ++i)
      if (test(i)) out.push_back(i);
    return out;
  }

  friend bool operator==(const DynBitset& a, const DynBitset& b) = default;

  struct Hash {
    size_t operator()(const DynBitset& b) const {
      std::uint64_t h = 1469598103934665603ull;
      for (auto w : b.words_) {
        h ^= w;
        h *= 1099511628211ull;
      }
      return static_cast<size_t>(h);
    }
  };

 private:
  int bits_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace detail

/// Minimal structurally overdetermined set: redundancy exactly 1; removing
/// any constraint leaves a just-constrained subsystem with a perfect matching.
struct MSOSet {
  std::vector<int> constraints;  // root indices, sorted
  std::vector<int> variables;    // induced var(C'), root indices, sorted

  friend bool operator==(const MSOSet& a, const MSOSet& b) {
    return a.constraints == b.constraints;
  }
  friend bool operator<(const MSOSet& a, const MSOSet& b) {
    return a.constraints < b.constraints;
  }
};

class MsoCapExceeded : public std::runtime_error {
 public:
  explicit MsoCapExceeded(std::int64_t cap)
      : std::runtime_error("MSO enumeration exceeded the cap of " + std::to_string(cap)),
        cap(cap) {}
  std::int64_t cap;
};

struct MsoOptions {
  std::int64_t cap = 1'000'000;
  int jobs = 1;
};

namespace detail {

struct MsoContext {
  const BipartiteGraph& g;
  std::int64_t cap;
  std::mutex mutex;
  std::unordered_set<DynBitset, DynBitset::Hash> visited;
  std::vector<DynBitset> found;
  std::atomic<bool> over_cap{false};
};

struct SubsetInfo {
  int matched = 0;        // max matching size over solvable edges
  int unknowns_all = 0;   // unknown variables incident via any edge
  DynBitset plus;         // constraints of the over-determined part
};

inline SubsetInfo analyze_subset(const BipartiteGraph& g, const DynBitset& s) {
  const int nc = g.num_constraints();
  std::vector<char> active(nc, 0);
  for (int c = 0; c < nc; ++c) active[c] = s.test(c);
  auto hk = hopcroft_karp(g, active);
  SubsetInfo info;
  info.matched = hk.size;
  std::vector<char> seen_var(g.num_variables(), 0);
  for (int c = 0; c < nc; ++c) {
    if (!active[c]) continue;
    for (int e : g.constraint_edges(c)) {
      int v = g.edge(e).variable;
      if (!seen_var[v] && !g.variable_known(v)) {
        seen_var[v] = 1;
        ++info.unknowns_all;
      }
    }
  }
  // Over-determined part: alternating reachability from free constraints.
  info.plus = DynBitset(nc);
  std::vector<char> vseen(g.num_variables(), 0);
  std::vector<int> stack;
  for (int c = 0; c < nc; ++c)
    if (active[c] && hk.constraint_match[c] == -1) {
      info.plus.set(c);
      stack.push_back(c);
    }
  while (!stack.empty()) {
    int c = stack.back();
    stack.pop_back();
    for (int e : g.constraint_edges(c)) {
      const auto& ge = g.edge(e);
      if (!ge.solvable || g.variable_known(ge.variable) || vseen[ge.variable]) continue;
      vseen[ge.variable] = 1;
      int cm = hk.variable_match[ge.variable];
      if (cm != -1 && active[cm] && !info.plus.test(cm)) {
        info.plus.set(cm);
        stack.push_back(cm);
      }
    }
  }
  return info;
}

// Top-down redundancy reduction: remove one constraint, keep the
// over-determined part, recurse; emit at structural redundancy 1. The
// visited set dedupes both exploration and emission.
inline void mso_explore(MsoContext& ctx, const DynBitset& s) {
  if (ctx.over_cap.load(std::memory_order_relaxed)) return;
  SubsetInfo info = analyze_subset(ctx.g, s);
  const int surplus = s.count() - info.matched;
  if (surplus <= 0) return;
  if (surplus == 1) {
    if (info.matched != info.unknowns_all) return;  // an unknown is uncoverable
    std::lock_guard lock(ctx.mutex);
    ctx.found.push_back(s);
    if (static_cast<std::int64_t>(ctx.found.size()) > ctx.cap) ctx.over_cap = true;
    return;
  }
  for (int c : s.to_vector()) {
    if (ctx.over_cap.load(std::memory_order_relaxed)) return;
    DynBitset child = s;
    child.reset(c);
    SubsetInfo child_info = analyze_subset(ctx.g, child);
    if (!child_info.plus.any()) continue;
    {
      std::lock_guard lock(ctx.mutex);
      if (!ctx.visited.insert(child_info.plus).second) continue;
    }
    mso_explore(ctx, child_info.plus);
  }
}

}  // namespace detail

/// Enumerates all MSO sets of an over-constrained graph (the caller reduces
/// to the over-determined part first, e.g. via dm_decompose). Deterministic
/// order: lexicographic by sorted constraint index lists. Throws
/// MsoCapExceeded when more than options.cap sets exist.
inline std::vector<MSOSet> enumerate_msos(const BipartiteGraph& gplus,
                                          const MsoOptions& options = {}) {
  const int nc = gplus.num_constraints();
  detail::MsoContext ctx{gplus, options.cap};
  detail::DynBitset all(nc);
  for (int c = 0; c < nc; ++c) all.set(c);

  if (nc > 0) {
    detail::SubsetInfo info = detail::analyze_subset(gplus, all);
    const int surplus = nc - info.matched;
    if (surplus == 1) {
      detail::mso_explore(ctx, all);
    } else if (surplus > 1) {
      // Parallelize across the top-level branches.
      std::vector<detail::DynBitset> branches;
      for (int c = 0; c < nc; ++c) {
        detail::DynBitset child = all;
        child.reset(c);
        auto child_info = detail::analyze_subset(gplus, child);
        if (!child_info.plus.any()) continue;
        if (ctx.visited.insert(child_info.plus).second)
          branches.push_back(child_info.plus);
      }
      const int jobs = std::max(1, std::min<int>(options.jobs, branches.size()));
      if (jobs <= 1) {
        for (const auto& b : branches) detail::mso_explore(ctx, b);
      } else {
        std::atomic<size_t> next{0};
        std::vector<std::thread> workers;
        for (int t = 0; t < jobs; ++t)
          workers.emplace_back([&] {
            for (size_t i = next.fetch_add(1); i < branches.size(); i = next.fetch_add(1))
              detail::mso_explore(ctx, branches[i]);
          });
        for (auto& w : workers) w.join();
      }
    }
  }
  if (ctx.over_cap) throw MsoCapExceeded(options.cap);

  std::vector<MSOSet> result;
  result.reserve(ctx.found.size());
  for (const auto& bits : ctx.found) {
    MSOSet mso;
    std::vector<char> seen_var(gplus.num_variables(), 0);
    for (int c : bits.to_vector()) {
      mso.constraints.push_back(gplus.constraint_root(c));
      for (int e : gplus.constraint_edges(c)) {
        int v = gplus.edge(e).variable;
        if (!seen_var[v]) {
          seen_var[v] = 1;
          mso.variables.push_back(gplus.variable_root(v));
        }
      }
    }
    std::sort(mso.constraints.begin(), mso.constraints.end());
    std::sort(mso.variables.begin(), mso.variables.end());
    result.push_back(std::move(mso));
  }
  std::sort(result.begin(), result.end());
  return result;
}

/// Keeps only the MSOs that contain at least one faultable constraint.
inline std::vector<MSOSet> filter_faultable(const std::vector<MSOSet>& msos,
                                            const StructuralModel& model) {
  std::vector<MSOSet> out;
  for (const auto& mso : msos) {
    bool any = false;
    for (int c : mso.constraints)
      if (model.constraint(c).faultable) {
        any = true;
        break;
      }
    if (any) out.push_back(mso);
  }
  return out;
}

/// The subgraph left for the MSO search after weighted elimination: matched
/// and fully-determined constraints drop out, matched variables are known.
inline BipartiteGraph remaining_graph(const BipartiteGraph& g,
                                      const EliminationResult& elim) {
  std::vector<char> drop_root;
  auto mark = [&](int root) {
    if (root >= static_cast<int>(drop_root.size())) drop_root.resize(root + 1, 0);
    drop_root[root] = 1;
  };
  for (const auto& p : elim.matching.pairs) mark(p.constraint);
  for (int c : elim.residual_candidates) mark(c);
  std::vector<int> keep;
  for (int c = 0; c < g.num_constraints(); ++c) {
    int root = g.constraint_root(c);
    if (root >= static_cast<int>(drop_root.size()) || !drop_root[root]) keep.push_back(c);
  }
  std::vector<int> known_roots;
  for (const auto& p : elim.matching.pairs) known_roots.push_back(p.variable);
  return g.induced(keep, known_roots);
}

}  // namespace strana
