#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "navlab/graph.hpp"

namespace navlab {

/// Agents start every episode facing the +y axis.
inline constexpr double kStartHeading = 0.0;

/// Instruction vocabulary: the four direction words, then one token per
/// landmark id.
inline constexpr int kDirectionTokens = kDirectionCount;
inline int direction_token(Direction d) { return static_cast<int>(d); }
inline int landmark_token(int landmark) { return kDirectionTokens + landmark; }
inline int vocabulary_size(int landmark_vocab) { return kDirectionTokens + landmark_vocab; }

struct Episode {
  std::string id;
  std::string env_id;
  std::vector<int> instruction_tokens;
  std::string instruction_text;
  NodeId start = 0;
  NodeId goal = 0;
  std::vector<NodeId> gt_path;
};

/// Tokens for following `path` from kStartHeading: for every hop, the
/// direction bin of the next node relative to the current heading, then the
/// landmark token of that node.
std::vector<int> describe_path(const EnvGraph& env, const std::vector<NodeId>& path);
std::string instruction_text(const std::vector<int>& tokens);

/// Throws ValidationError if the gt path is not a walk from start to goal in
/// `env` or a token falls outside the vocabulary.
void validate_episode(const Episode& episode, const EnvGraph& env, int landmark_vocab);

/// Samples (start, goal) pairs uniformly among those whose shortest path has
/// a hop count in [min_hops, max_hops].
std::vector<Episode> generate_episodes(const EnvGraph& env, std::uint64_t seed, int count,
                                       int min_hops, int max_hops);

/// A set of worlds plus episodes that reference them by id.
struct Dataset {
  std::map<std::string, EnvGraph> envs;
  std::vector<Episode> episodes;

  const EnvGraph& env(const std::string& id) const;
  void add_env(EnvGraph env);
};

}  // namespace navlab
