#pragma once

#include <map>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "navlab/graph.hpp"
#include "navlab/tensor.hpp"

namespace navlab {

/// Id of the synthetic stop node. It sorts after every real node.
inline constexpr NodeId kStopNode = -1;
/// Visit-order sentinel carried by the stop node.
inline constexpr int kStopOrder = -1;

enum class NodeStatus { Visited, Unexplored, Stop };

struct MemoryNode {
  NodeId id = 0;
  NodeStatus status = NodeStatus::Unexplored;
  /// First-visit order (1-based); 0 while unexplored.
  int visit_order = 0;
  Vec2 position;
  /// Visited: the node's own candidate-view latents. Unexplored: partial views
  /// facing it from adjacent visited nodes.
  std::vector<Tensor> views;
};

/// Topological map built on the fly: visited nodes, their unexplored
/// neighbours, the discovered edges and a stop node.
class GraphMemory {
 public:
  bool empty() const { return nodes_.empty(); }

  /// Arrive at `node` facing `heading`. On a first visit the node becomes
  /// visited, its candidate-view latents (aligned with `obs.candidates`) are
  /// stored and each unexplored neighbour receives the view facing it.
  /// Revisits only move the agent. Throws IllegalMoveError when `node` is not
  /// adjacent to the current node (the first call may start anywhere).
  void update(const EnvGraph& env, NodeId node, double heading, const Observation& obs,
              std::span<const Tensor> merged);

  NodeId current() const { return current_; }
  double heading() const { return heading_; }
  Vec2 current_position() const;
  int visited_count() const { return visited_count_; }

  bool contains(NodeId id) const { return id == kStopNode || nodes_.count(id) > 0; }
  NodeStatus status(NodeId id) const;
  const MemoryNode& node(NodeId id) const;
  /// Memory nodes by ascending id followed by the stop node.
  std::vector<NodeId> ordered_nodes() const;
  std::vector<NodeId> unexplored() const;
  const std::set<std::pair<NodeId, NodeId>>& edges() const { return edges_; }

  /// Graph over env ids containing only discovered edges.
  WeightedGraph graph(const EnvGraph& env) const;
  /// Shortest path through discovered edges from the current node to
  /// `target`, excluding the current node. Empty for the stop node.
  std::vector<NodeId> route_to(const EnvGraph& env, NodeId target) const;

 private:
  std::map<NodeId, MemoryNode> nodes_;
  std::set<std::pair<NodeId, NodeId>> edges_;
  NodeId current_ = kStopNode;
  double heading_ = 0.0;
  int visited_count_ = 0;
  MemoryNode stop_{kStopNode, NodeStatus::Stop, kStopOrder, {}, {}};
};

}  // namespace navlab
