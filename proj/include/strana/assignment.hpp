#pragma once

#include <algorithm>
#include <cassert>
#include <limits>
#include <optional>
#include <queue>
#include <set>
#include <utility>
#include <vector>

#include "strana/cost.hpp"

namespace strana {

/// A square assignment: row i is assigned column row_to_col[i].
struct Assignment {
  std::vector<int> row_to_col;
  Cost cost = 0;

  friend bool operator==(const Assignment& a, const Assignment& b) = default;
};

/// Minimum-cost perfect assignment on a square cost matrix (Jonker-Volgenant
/// style shortest augmenting paths with potentials, O(n^3), exact integer
/// arithmetic). Forbidden pairs are encoded by the caller as a sentinel cost
/// strictly greater than any feasible total; the result is "infeasible" iff
/// the optimal cost reaches the sentinel.
inline Assignment solve_assignment(const std::vector<std::vector<Cost>>& a) {
  const int n = static_cast<int>(a.size());
  Assignment result;
  result.row_to_col.assign(n, -1);
  if (n == 0) return result;

  const Cost kInf = std::numeric_limits<Cost>::max() / 4;
  std::vector<Cost> u(n + 1, 0), v(n + 1, 0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    minv.assign(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      int i0 = p[j0], j1 = 0;
      Cost delta = kInf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        Cost cur = a[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) result.row_to_col[p[j] - 1] = j - 1;
  for (int i = 0; i < n; ++i) result.cost += a[i][result.row_to_col[i]];
  return result;
}

/// Lazy enumeration of ALL perfect assignments in non-decreasing cost order
/// (Murty's partitioning). Each popped solution splits its node's solution
/// space along the solution's free pairs in fixed row order: child k forces
/// pairs 0..k-1 in and pair k out, so the children partition the remainder
/// and duplicates are impossible by construction (asserted in debug builds).
///
/// `big` is the forbidden-pair sentinel: matrix entries >= big are treated as
/// missing edges and the sequence stops before emitting any solution whose
/// cost reaches big.
class MurtyEnumerator {
 public:
  MurtyEnumerator(std::vector<std::vector<Cost>> cost, Cost big)
      : cost_(std::move(cost)), big_(big) {
    const int n = static_cast<int>(cost_.size());
    if (n == 0) {
      // Single empty assignment.
      queue_.push({Assignment{}, {}, {}});
      return;
    }
    Node root;
    if (solve_node(root)) queue_.push(std::move(root));
  }

  std::optional<Assignment> next() {
    if (queue_.empty()) return std::nullopt;
    Node node = queue_.top();
    queue_.pop();
#ifndef NDEBUG
    assert(emitted_.insert(node.solution.row_to_col).second && "duplicate assignment");
#endif
    split(node);
    return node.solution;
  }

 private:
  struct Node {
    Assignment solution;
    std::vector<std::pair<int, int>> includes;
    std::vector<std::pair<int, int>> excludes;
  };
  struct NodeOrder {
    bool operator()(const Node& a, const Node& b) const {
      if (a.solution.cost != b.solution.cost) return a.solution.cost > b.solution.cost;
      return a.solution.row_to_col > b.solution.row_to_col;
    }
  };

  // Solves the subproblem of `node` (includes forced, excludes forbidden).
  // Returns false when no perfect assignment avoiding the sentinel exists.
  bool solve_node(Node& node) {
    const int n = static_cast<int>(cost_.size());
    std::vector<char> row_fixed(n, 0), col_fixed(n, 0);
    Cost fixed_cost = 0;
    for (auto [r, c] : node.includes) {
      row_fixed[r] = col_fixed[c] = 1;
      fixed_cost += cost_[r][c];
    }
    std::vector<int> rows, cols;
    for (int i = 0; i < n; ++i)
      if (!row_fixed[i]) rows.push_back(i);
    for (int j = 0; j < n; ++j)
      if (!col_fixed[j]) cols.push_back(j);
    const int m = static_cast<int>(rows.size());
    std::vector<std::vector<Cost>> sub(m, std::vector<Cost>(m));
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) sub[i][j] = cost_[rows[i]][cols[j]];
    for (auto [r, c] : node.excludes) {
      auto ri = std::find(rows.begin(), rows.end(), r);
      auto ci = std::find(cols.begin(), cols.end(), c);
      if (ri != rows.end() && ci != cols.end())
        sub[ri - rows.begin()][ci - cols.begin()] = big_;
    }
    Assignment sol = solve_assignment(sub);
    if (fixed_cost + sol.cost >= big_) return false;
    node.solution.row_to_col.assign(n, -1);
    for (auto [r, c] : node.includes) node.solution.row_to_col[r] = c;
    for (int i = 0; i < m; ++i) node.solution.row_to_col[rows[i]] = cols[sol.row_to_col[i]];
    node.solution.cost = fixed_cost + sol.cost;
    return true;
  }

  void split(const Node& node) {
    const int n = static_cast<int>(cost_.size());
    if (n == 0) return;
    std::vector<char> included_row(n, 0);
    for (auto [r, c] : node.includes) included_row[r] = 1;
    Node child;
    child.includes = node.includes;
    child.excludes = node.excludes;
    for (int r = 0; r < n; ++r) {
      if (included_row[r]) continue;
      const int c = node.solution.row_to_col[r];
      child.excludes.push_back({r, c});
      if (solve_node(child)) queue_.push(child);
      child.excludes.pop_back();
      child.includes.push_back({r, c});
    }
  }

  std::vector<std::vector<Cost>> cost_;
  Cost big_;
  std::priority_queue<Node, std::vector<Node>, NodeOrder> queue_;
#ifndef NDEBUG
  std::set<std::vector<int>> emitted_;
#endif
};

}  // namespace strana
