#include "navlab/episode.hpp"

#include <sstream>

#include "navlab/error.hpp"
#include "navlab/rng.hpp"

namespace navlab {

std::vector<int> describe_path(const EnvGraph& env, const std::vector<NodeId>& path) {
  std::vector<int> tokens;
  double heading = kStartHeading;
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    const double bearing = bearing_degrees(env.position(path[k]), env.position(path[k + 1]));
    tokens.push_back(direction_token(direction_of(bearing - heading)));
    tokens.push_back(landmark_token(env.landmark(path[k + 1])));
    heading = bearing;
  }
  return tokens;
}

std::string instruction_text(const std::vector<int>& tokens) {
  std::ostringstream os;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const int t = tokens[i];
    if (t < kDirectionTokens) {
      if (i > 0) os << ", then ";
      os << "go " << direction_word(static_cast<Direction>(t));
    } else {
      os << " to landmark " << (t - kDirectionTokens);
    }
  }
  return os.str();
}

void validate_episode(const Episode& episode, const EnvGraph& env, int landmark_vocab) {
  const auto& path = episode.gt_path;
  if (path.empty()) throw ValidationError("episode " + episode.id + ": empty gt path");
  if (path.front() != episode.start || path.back() != episode.goal) {
    throw ValidationError("episode " + episode.id + ": gt path does not join start and goal");
  }
  for (NodeId n : path) {
    if (!env.contains(n)) {
      throw ValidationError("episode " + episode.id + ": unknown node " + std::to_string(n));
    }
  }
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    if (!env.has_edge(path[i], path[i + 1])) {
      throw ValidationError("episode " + episode.id + ": gt path step " + std::to_string(i) +
                            " is not an edge");
    }
  }
  const int vocab = vocabulary_size(landmark_vocab);
  for (int t : episode.instruction_tokens) {
    if (t < 0 || t >= vocab) {
      throw ValidationError("episode " + episode.id + ": token " + std::to_string(t) +
                            " outside vocabulary of " + std::to_string(vocab));
    }
  }
}

std::vector<Episode> generate_episodes(const EnvGraph& env, std::uint64_t seed, int count,
                                       int min_hops, int max_hops) {
  if (min_hops < 1 || max_hops < min_hops) {
    throw ValidationError("generate_episodes: need 1 <= min_hops <= max_hops");
  }
  if (count < 0) throw ValidationError("generate_episodes: negative count");
  std::vector<PathResult> feasible;
  const auto n = static_cast<NodeId>(env.node_count());
  for (NodeId s = 0; s < n; ++s) {
    for (NodeId g = 0; g < n; ++g) {
      if (s == g) continue;
      auto p = shortest_path(env, s, g);
      const int hops = static_cast<int>(p.path.size()) - 1;
      if (hops >= min_hops && hops <= max_hops) feasible.push_back(std::move(p));
    }
  }
  if (feasible.empty() && count > 0) {
    throw GenerationExhaustedError("generate_episodes: no start/goal pair in " + env.id() +
                                   " has between " + std::to_string(min_hops) + " and " +
                                   std::to_string(max_hops) + " hops");
  }
  Rng rng(seed);
  std::vector<Episode> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    const auto& p = feasible[uniform_index(rng, feasible.size())];
    Episode e;
    std::ostringstream id;
    id << env.id() << "_ep" << i;
    e.id = id.str();
    e.env_id = env.id();
    e.start = p.path.front();
    e.goal = p.path.back();
    e.gt_path = p.path;
    e.instruction_tokens = describe_path(env, p.path);
    e.instruction_text = instruction_text(e.instruction_tokens);
    out.push_back(std::move(e));
  }
  return out;
}

const EnvGraph& Dataset::env(const std::string& id) const {
  auto it = envs.find(id);
  if (it == envs.end()) throw ReferenceError("unknown environment '" + id + "'");
  return it->second;
}

void Dataset::add_env(EnvGraph env) {
  auto id = env.id();
  envs.insert_or_assign(std::move(id), std::move(env));
}

}  // namespace navlab
