#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace navlab {

using NodeId = int;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

double euclidean(Vec2 a, Vec2 b);
/// Wraps an angle in degrees into [0, 360).
double wrap_degrees(double deg);
/// Bearing from `from` to `to` in degrees, clockwise from the +y axis.
double bearing_degrees(Vec2 from, Vec2 to);

/// Egocentric direction bins: [315,45) front, [45,135) right,
/// [135,225) rear, [225,315) left.
enum class Direction : int { Front = 0, Right = 1, Rear = 2, Left = 3 };
inline constexpr int kDirectionCount = 4;
Direction direction_of(double relative_degrees);
std::string_view direction_word(Direction d);

struct Neighbor {
  NodeId node;
  double length;
};

/// Adjacency over dense node ids [0, n). Neighbour lists are kept sorted by id.
class WeightedGraph {
 public:
  WeightedGraph() = default;
  explicit WeightedGraph(std::size_t node_count) : adjacency_(node_count) {}

  std::size_t node_count() const { return adjacency_.size(); }
  void add_edge(NodeId u, NodeId v, double length);
  bool has_edge(NodeId u, NodeId v) const;
  std::span<const Neighbor> neighbors(NodeId u) const { return adjacency_.at(u); }

 private:
  std::vector<std::vector<Neighbor>> adjacency_;
};

struct PathResult {
  std::vector<NodeId> path;
  double length = 0.0;
};

/// Single-source Dijkstra; unreachable nodes get +inf.
std::vector<double> distances_from(const WeightedGraph& graph, NodeId source);

/// Minimum-length path. Among paths whose length is within 1e-9 (relative)
/// of the optimum, returns the lexicographically smallest node sequence.
/// Throws DisconnectedError when `to` is unreachable.
PathResult shortest_path(const WeightedGraph& graph, NodeId from, NodeId to);

struct EnvNode {
  Vec2 pos;
  int landmark = 0;
};

/// Connected undirected world graph. Node ids are dense: 0..n-1. Edge
/// lengths are the Euclidean distance between endpoints. Immutable.
class EnvGraph {
 public:
  EnvGraph() = default;
  /// Validates ids, rejects self loops and duplicate edges, and requires
  /// connectivity (ValidationError otherwise).
  EnvGraph(std::string id, std::vector<EnvNode> nodes,
           std::vector<std::pair<NodeId, NodeId>> edges);

  const std::string& id() const { return id_; }
  std::size_t node_count() const { return nodes_.size(); }
  bool contains(NodeId n) const { return n >= 0 && static_cast<std::size_t>(n) < nodes_.size(); }
  const EnvNode& node(NodeId n) const;
  Vec2 position(NodeId n) const { return node(n).pos; }
  int landmark(NodeId n) const { return node(n).landmark; }
  std::span<const Neighbor> neighbors(NodeId n) const { return graph_.neighbors(n); }
  bool has_edge(NodeId u, NodeId v) const;
  std::optional<double> edge_length(NodeId u, NodeId v) const;
  /// Undirected edges as (u, v) with u < v, sorted.
  std::vector<std::pair<NodeId, NodeId>> edges() const;
  const WeightedGraph& graph() const { return graph_; }
  /// Precomputed all-pairs geodesic distance.
  double geodesic(NodeId a, NodeId b) const;

 private:
  std::string id_;
  std::vector<EnvNode> nodes_;
  WeightedGraph graph_;
  std::vector<double> geodesic_;
};

PathResult shortest_path(const EnvGraph& env, NodeId from, NodeId to);
double geodesic_distance(const EnvGraph& env, NodeId a, NodeId b);

struct Candidate {
  NodeId node;
  int landmark;
  /// Relative angle a_i in [0, 360).
  double angle;
  Direction direction;
};

struct Observation {
  NodeId at;
  double heading;
  std::vector<Candidate> candidates;  // one per neighbour, ascending node id
};

/// Candidate views of every neighbour of `at`. a_i = bearing(at→i) − heading.
/// Candidates are listed clockwise from straight ahead (ties by node id).
Observation observe(const EnvGraph& env, NodeId at, double heading);

/// Mean spacing used to size the square of a generated world: side = 5·√n m.
inline constexpr double kWorldSpacing = 5.0;

/// Random geometric graph with nearest-component bridging.
EnvGraph generate_env(std::uint64_t seed, int node_count, double radius, int landmark_vocab,
                      std::string id = {});

}  // namespace navlab
