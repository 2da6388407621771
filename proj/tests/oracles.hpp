#pragma once

// Slow independent reference implementations used by the tests.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "navlab/graph.hpp"
#include "navlab/memory.hpp"

namespace oracle {

using navlab::NodeId;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// All-pairs distances by Floyd–Warshall.
inline std::vector<double> floyd_warshall(const navlab::WeightedGraph& g) {
  const std::size_t n = g.node_count();
  std::vector<double> d(n * n, kInf);
  for (std::size_t i = 0; i < n; ++i) {
    d[i * n + i] = 0.0;
    for (const auto& nb : g.neighbors(static_cast<NodeId>(i))) d[i * n + nb.node] = nb.length;
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (d[i * n + k] + d[k * n + j] < d[i * n + j]) d[i * n + j] = d[i * n + k] + d[k * n + j];
  return d;
}

struct BrutePath {
  std::vector<NodeId> path;
  double length = kInf;
};

/// Enumerates every simple path from `from` to `to` and keeps the shortest,
/// breaking near-ties (1e-9 relative) by lexicographic order.
inline BrutePath all_simple_paths_min(const navlab::WeightedGraph& g, NodeId from, NodeId to) {
  BrutePath best;
  std::vector<NodeId> stack{from};
  std::vector<bool> on(g.node_count(), false);
  on[from] = true;
  std::vector<std::pair<std::vector<NodeId>, double>> found;
  std::function<void(double)> dfs = [&](double len) {
    const NodeId u = stack.back();
    if (u == to) {
      found.emplace_back(stack, len);
      return;
    }
    for (const auto& nb : g.neighbors(u)) {
      if (on[nb.node]) continue;
      on[nb.node] = true;
      stack.push_back(nb.node);
      dfs(len + nb.length);
      stack.pop_back();
      on[nb.node] = false;
    }
  };
  dfs(0.0);
  double opt = kInf;
  for (const auto& [p, l] : found) opt = std::min(opt, l);
  for (const auto& [p, l] : found) {
    if (l > opt + 1e-9 * std::max(1.0, opt)) continue;
    if (best.path.empty() || p < best.path) best = {p, l};
  }
  if (!best.path.empty()) best.length = opt;
  return best;
}

/// Minimum over every monotone warping path, enumerated recursively.
inline double exhaustive_dtw(const std::vector<std::vector<double>>& cost, std::size_t i = 0,
                             std::size_t j = 0) {
  const std::size_t n = cost.size(), m = cost[0].size();
  const double here = cost[i][j];
  if (i == n - 1 && j == m - 1) return here;
  double best = kInf;
  if (i + 1 < n) best = std::min(best, exhaustive_dtw(cost, i + 1, j));
  if (j + 1 < m) best = std::min(best, exhaustive_dtw(cost, i, j + 1));
  if (i + 1 < n && j + 1 < m) best = std::min(best, exhaustive_dtw(cost, i + 1, j + 1));
  return here + best;
}

/// Pseudo-label by direct minimisation: memory distances from Floyd–Warshall
/// over the discovered edges, goal distances from Floyd–Warshall over the
/// whole world.
inline NodeId brute_pseudo_label(const navlab::GraphMemory& mem, const navlab::EnvGraph& env,
                                 NodeId goal, double threshold, bool add_memory_distance) {
  const auto world = floyd_warshall(env.graph());
  const std::size_t n = env.node_count();
  if (mem.current() == goal || world[mem.current() * n + goal] < threshold) return navlab::kStopNode;
  const auto local = floyd_warshall(mem.graph(env));
  NodeId best = navlab::kStopNode;
  double best_cost = kInf;
  for (NodeId v = 0; v < static_cast<NodeId>(n); ++v) {
    if (!mem.contains(v) || mem.status(v) != navlab::NodeStatus::Unexplored) continue;
    double c = world[v * n + goal];
    if (add_memory_distance) c += local[mem.current() * n + v];
    if (best == navlab::kStopNode || c < best_cost - 1e-9 * std::max(1.0, best_cost)) {
      best = v;
      best_cost = c;
    }
  }
  return best;
}

}  // namespace oracle
