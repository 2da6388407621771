#include "navlab/memory.hpp"

#include <cassert>

#include "navlab/error.hpp"

namespace navlab {

void GraphMemory::update(const EnvGraph& env, NodeId node, double heading, const Observation& obs,
                         std::span<const Tensor> merged) {
  if (!env.contains(node)) throw IllegalMoveError("unknown node " + std::to_string(node));
  if (!empty() && node != current_ && !env.has_edge(current_, node)) {
    throw IllegalMoveError("node " + std::to_string(node) + " is not adjacent to " +
                           std::to_string(current_));
  }
  current_ = node;
  heading_ = wrap_degrees(heading);

  auto& record = nodes_[node];
  if (record.status == NodeStatus::Visited) return;

  if (obs.at != node || merged.size() != obs.candidates.size()) {
    throw DimensionError("memory update: observation does not belong to node " +
                         std::to_string(node));
  }
  record.id = node;
  record.status = NodeStatus::Visited;
  record.visit_order = ++visited_count_;
  record.position = env.position(node);
  record.views.assign(merged.begin(), merged.end());

  for (std::size_t i = 0; i < obs.candidates.size(); ++i) {
    const NodeId nb = obs.candidates[i].node;
    edges_.emplace(std::min(node, nb), std::max(node, nb));
    auto& neighbour = nodes_[nb];
    if (neighbour.status == NodeStatus::Visited) continue;
    neighbour.id = nb;
    neighbour.status = NodeStatus::Unexplored;
    neighbour.visit_order = 0;
    neighbour.position = env.position(nb);
    neighbour.views.push_back(merged[i]);
  }
}

Vec2 GraphMemory::current_position() const { return node(current_).position; }

NodeStatus GraphMemory::status(NodeId id) const { return node(id).status; }

const MemoryNode& GraphMemory::node(NodeId id) const {
  if (id == kStopNode) return stop_;
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw ReferenceError("node " + std::to_string(id) + " not in memory");
  return it->second;
}

std::vector<NodeId> GraphMemory::ordered_nodes() const {
  std::vector<NodeId> ids;
  ids.reserve(nodes_.size() + 1);
  for (const auto& [id, _] : nodes_) ids.push_back(id);
  ids.push_back(kStopNode);
  return ids;
}

std::vector<NodeId> GraphMemory::unexplored() const {
  std::vector<NodeId> ids;
  for (const auto& [id, rec] : nodes_) {
    if (rec.status == NodeStatus::Unexplored) ids.push_back(id);
  }
  return ids;
}

WeightedGraph GraphMemory::graph(const EnvGraph& env) const {
  WeightedGraph g(env.node_count());
  for (auto [u, v] : edges_) g.add_edge(u, v, *env.edge_length(u, v));
  return g;
}

std::vector<NodeId> GraphMemory::route_to(const EnvGraph& env, NodeId target) const {
  if (target == kStopNode) return {};
  if (!contains(target)) throw ReferenceError("route target " + std::to_string(target) + " not in memory");
  auto result = shortest_path(graph(env), current_, target);
  assert(result.path.front() == current_);
  result.path.erase(result.path.begin());
  return result.path;
}

}  // namespace navlab
