#include "navlab/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <queue>

#include "navlab/error.hpp"
#include "navlab/rng.hpp"

namespace navlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool nearly_equal(double a, double b) {
  return std::abs(a - b) <= 1e-9 * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

}  // namespace

double euclidean(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

double wrap_degrees(double deg) {
  double w = std::fmod(deg, 360.0);
  if (w < 0.0) w += 360.0;
  if (w >= 360.0) w = 0.0;
  return w;
}

double bearing_degrees(Vec2 from, Vec2 to) {
  const double rad = std::atan2(to.x - from.x, to.y - from.y);
  return wrap_degrees(rad * 180.0 / std::numbers::pi);
}

Direction direction_of(double relative_degrees) {
  const double a = wrap_degrees(relative_degrees);
  if (a >= 315.0 || a < 45.0) return Direction::Front;
  if (a < 135.0) return Direction::Right;
  if (a < 225.0) return Direction::Rear;
  return Direction::Left;
}

std::string_view direction_word(Direction d) {
  switch (d) {
    case Direction::Front: return "front";
    case Direction::Right: return "right";
    case Direction::Rear: return "rear";
    case Direction::Left: return "left";
  }
  return "front";
}

void WeightedGraph::add_edge(NodeId u, NodeId v, double length) {
  auto insert = [&](NodeId a, NodeId b) {
    auto& list = adjacency_.at(a);
    auto it = std::lower_bound(list.begin(), list.end(), b,
                               [](const Neighbor& n, NodeId id) { return n.node < id; });
    list.insert(it, Neighbor{b, length});
  };
  insert(u, v);
  insert(v, u);
}

bool WeightedGraph::has_edge(NodeId u, NodeId v) const {
  if (u < 0 || static_cast<std::size_t>(u) >= adjacency_.size()) return false;
  const auto& list = adjacency_[u];
  return std::binary_search(list.begin(), list.end(), Neighbor{v, 0.0},
                            [](const Neighbor& a, const Neighbor& b) { return a.node < b.node; });
}

std::vector<double> distances_from(const WeightedGraph& graph, NodeId source) {
  std::vector<double> dist(graph.node_count(), kInf);
  using Item = std::pair<double, NodeId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  dist.at(source) = 0.0;
  queue.emplace(0.0, source);
  while (!queue.empty()) {
    auto [d, u] = queue.top();
    queue.pop();
    if (d > dist[u]) continue;
    for (const auto& nb : graph.neighbors(u)) {
      const double nd = d + nb.length;
      if (nd < dist[nb.node]) {
        dist[nb.node] = nd;
        queue.emplace(nd, nb.node);
      }
    }
  }
  return dist;
}

PathResult shortest_path(const WeightedGraph& graph, NodeId from, NodeId to) {
  const auto n = static_cast<NodeId>(graph.node_count());
  if (from < 0 || from >= n || to < 0 || to >= n) {
    throw ReferenceError("shortest_path: unknown node " + std::to_string(from < 0 || from >= n ? from : to));
  }
  const auto to_target = distances_from(graph, to);
  if (!std::isfinite(to_target[from])) {
    throw DisconnectedError("shortest_path: node " + std::to_string(to) +
                            " unreachable from " + std::to_string(from));
  }
  PathResult result;
  result.path.push_back(from);
  NodeId u = from;
  while (u != to) {
    if (result.path.size() > graph.node_count()) {
      throw DisconnectedError("shortest_path: failed to trace path");
    }
    NodeId next = -1;
    double step = 0.0;
    for (const auto& nb : graph.neighbors(u)) {
      if (!std::isfinite(to_target[nb.node])) continue;
      if (nearly_equal(to_target[u], nb.length + to_target[nb.node])) {
        next = nb.node;
        step = nb.length;
        break;
      }
    }
    if (next < 0) throw DisconnectedError("shortest_path: failed to trace path");
    result.path.push_back(next);
    result.length += step;
    u = next;
  }
  return result;
}

EnvGraph::EnvGraph(std::string id, std::vector<EnvNode> nodes,
                   std::vector<std::pair<NodeId, NodeId>> edges)
    : id_(std::move(id)), nodes_(std::move(nodes)), graph_(nodes_.size()) {
  if (nodes_.empty()) throw ValidationError("environment has no nodes");
  for (auto [u, v] : edges) {
    if (!contains(u) || !contains(v)) {
      throw ValidationError("edge (" + std::to_string(u) + "," + std::to_string(v) +
                            ") references an unknown node");
    }
    if (u == v) throw ValidationError("self loop on node " + std::to_string(u));
    if (graph_.has_edge(u, v)) {
      throw ValidationError("duplicate edge (" + std::to_string(u) + "," + std::to_string(v) + ")");
    }
    graph_.add_edge(u, v, euclidean(nodes_[u].pos, nodes_[v].pos));
  }
  const std::size_t n = nodes_.size();
  geodesic_.assign(n * n, kInf);
  for (std::size_t s = 0; s < n; ++s) {
    auto d = distances_from(graph_, static_cast<NodeId>(s));
    std::copy(d.begin(), d.end(), geodesic_.begin() + s * n);
  }
  for (double d : geodesic_) {
    if (!std::isfinite(d)) throw ValidationError("environment " + id_ + " is not connected");
  }
}

const EnvNode& EnvGraph::node(NodeId n) const {
  if (!contains(n)) throw ReferenceError("unknown node " + std::to_string(n) + " in " + id_);
  return nodes_[n];
}

bool EnvGraph::has_edge(NodeId u, NodeId v) const { return graph_.has_edge(u, v); }

std::optional<double> EnvGraph::edge_length(NodeId u, NodeId v) const {
  if (!contains(u)) return std::nullopt;
  for (const auto& nb : graph_.neighbors(u)) {
    if (nb.node == v) return nb.length;
  }
  return std::nullopt;
}

std::vector<std::pair<NodeId, NodeId>> EnvGraph::edges() const {
  std::vector<std::pair<NodeId, NodeId>> out;
  for (NodeId u = 0; u < static_cast<NodeId>(nodes_.size()); ++u) {
    for (const auto& nb : graph_.neighbors(u)) {
      if (u < nb.node) out.emplace_back(u, nb.node);
    }
  }
  return out;
}

double EnvGraph::geodesic(NodeId a, NodeId b) const {
  if (!contains(a) || !contains(b)) {
    throw ReferenceError("geodesic: unknown node in " + id_);
  }
  return geodesic_[static_cast<std::size_t>(a) * nodes_.size() + b];
}

PathResult shortest_path(const EnvGraph& env, NodeId from, NodeId to) {
  return shortest_path(env.graph(), from, to);
}

double geodesic_distance(const EnvGraph& env, NodeId a, NodeId b) { return env.geodesic(a, b); }

Observation observe(const EnvGraph& env, NodeId at, double heading) {
  Observation obs{at, wrap_degrees(heading), {}};
  const Vec2 here = env.position(at);
  for (const auto& nb : env.neighbors(at)) {
    const double angle = wrap_degrees(bearing_degrees(here, env.position(nb.node)) - obs.heading);
    obs.candidates.push_back(Candidate{nb.node, env.landmark(nb.node), angle, direction_of(angle)});
  }
  std::sort(obs.candidates.begin(), obs.candidates.end(), [](const Candidate& a, const Candidate& b) {
    return a.angle != b.angle ? a.angle < b.angle : a.node < b.node;
  });
  return obs;
}

EnvGraph generate_env(std::uint64_t seed, int node_count, double radius, int landmark_vocab,
                      std::string id) {
  if (node_count < 2) throw ValidationError("generate_env: node_count must be at least 2");
  if (!(radius > 0.0)) throw ValidationError("generate_env: radius must be positive");
  if (landmark_vocab < 1) throw ValidationError("generate_env: landmark vocabulary is empty");
  if (id.empty()) id = "env_" + std::to_string(seed);

  Rng rng(seed);
  const double side = kWorldSpacing * std::sqrt(static_cast<double>(node_count));
  const auto n = static_cast<std::size_t>(node_count);
  std::vector<EnvNode> nodes(n);
  for (auto& node : nodes) {
    node.pos.x = uniform(rng, 0.0, side);
    node.pos.y = uniform(rng, 0.0, side);
  }
  for (auto& node : nodes) node.landmark = static_cast<int>(uniform_index(rng, landmark_vocab));

  std::vector<std::pair<NodeId, NodeId>> edges;
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::size_t components = n;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (euclidean(nodes[i].pos, nodes[j].pos) <= radius) {
        edges.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>(j));
        auto a = find(i), b = find(j);
        if (a != b) {
          parent[a] = b;
          --components;
        }
      }
    }
  }
  // Bridge the closest pair of nodes in different components until connected.
  while (components > 1) {
    double best = kInf;
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (find(i) == find(j)) continue;
        const double d = euclidean(nodes[i].pos, nodes[j].pos);
        if (d < best) {
          best = d;
          bi = i;
          bj = j;
        }
      }
    }
    edges.emplace_back(static_cast<NodeId>(bi), static_cast<NodeId>(bj));
    parent[find(bi)] = find(bj);
    --components;
  }
  std::sort(edges.begin(), edges.end());
  return EnvGraph(std::move(id), std::move(nodes), std::move(edges));
}

}  // namespace navlab
