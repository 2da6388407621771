#pragma once

#include <vector>

#include "navlab/graph.hpp"
#include "navlab/memory.hpp"
#include "navlab/rng.hpp"

namespace testing_support {

using namespace navlab;

/// Connected random graph on n nodes: a random spanning tree plus extra
/// edges, positions in a 20 m square.
inline EnvGraph random_world(Rng& rng, int n, int extra_edges, int landmarks = 6) {
  std::vector<EnvNode> nodes;
  for (int i = 0; i < n; ++i) {
    nodes.push_back({{uniform(rng, 0.0, 20.0), uniform(rng, 0.0, 20.0)},
                     static_cast<int>(uniform_index(rng, landmarks))});
  }
  std::vector<std::pair<NodeId, NodeId>> edges;
  auto has = [&](NodeId a, NodeId b) {
    for (auto [u, v] : edges)
      if ((u == a && v == b) || (u == b && v == a)) return true;
    return false;
  };
  for (int i = 1; i < n; ++i) edges.emplace_back(static_cast<NodeId>(uniform_index(rng, i)), i);
  for (int e = 0; e < extra_edges; ++e) {
    const auto a = static_cast<NodeId>(uniform_index(rng, n));
    const auto b = static_cast<NodeId>(uniform_index(rng, n));
    if (a != b && !has(a, b)) edges.emplace_back(a, b);
  }
  return EnvGraph("w", std::move(nodes), std::move(edges));
}

/// Dummy one-wide view latents for an observation.
inline std::vector<Tensor> dummy_views(const Observation& obs) {
  std::vector<Tensor> out;
  for (const auto& c : obs.candidates) out.push_back(Tensor::row({double(c.node)}));
  return out;
}

/// Memory after a random walk of `hops` moves from `start`.
inline GraphMemory random_memory(const EnvGraph& env, Rng& rng, NodeId start, int hops) {
  GraphMemory mem;
  double heading = 0.0;
  NodeId here = start;
  auto obs = observe(env, here, heading);
  mem.update(env, here, heading, obs, dummy_views(obs));
  for (int h = 0; h < hops; ++h) {
    const auto nbs = env.neighbors(here);
    const NodeId next = nbs[uniform_index(rng, nbs.size())].node;
    heading = bearing_degrees(env.position(here), env.position(next));
    here = next;
    obs = observe(env, here, heading);
    mem.update(env, here, heading, obs, dummy_views(obs));
  }
  return mem;
}

}  // namespace testing_support
