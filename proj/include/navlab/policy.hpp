#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "navlab/episode.hpp"
#include "navlab/latent.hpp"
#include "navlab/memory.hpp"
#include "navlab/nn.hpp"

namespace navlab {

struct PolicyConfig {
  int hidden = 64;
  int heads = 1;
  int ffn_hidden = 128;
  int node_encoder_depth = 2;
  int cross_modal_depth = 2;
  /// Extra graph-aware layers after the cross-modal stack.
  int gasa_layers = 0;
  /// Step embedding rows; index 0 is reserved for unexplored nodes and visit
  /// orders are clamped to the last row.
  int step_table_size = 17;
  double affinity_w_init = -0.1;
  /// Width of the merged view / instruction latents fed in.
  int latent_dim = 64;
};

/// Self-attention whose logits carry the bias w·distance + b, followed by the
/// feed-forward sublayer.
struct GasaLayer {
  nn::EncoderLayer layer;
  Tensor w;  // scalar
  Tensor b;  // scalar
};

struct CrossModalLayer {
  nn::Attention cross;  // node queries, instruction keys/values
  nn::LayerNorm norm;
  GasaLayer gasa;
};

class PolicyModel {
 public:
  PolicyModel(const PolicyConfig& config, std::uint64_t seed);

  const PolicyConfig& config() const { return config_; }
  nn::ParameterList parameters() const;

  std::optional<nn::Linear> latent_projection;  // only when latent_dim != hidden
  nn::FeedForward direction_mlp;                // E^d
  Tensor step_table;                            // E^s
  Tensor stop_embedding;
  std::vector<nn::EncoderLayer> node_encoder;
  std::vector<CrossModalLayer> cross_layers;
  std::vector<GasaLayer> gasa_stack;
  nn::FeedForward score_head;

 private:
  PolicyConfig config_;
};

/// Inputs of the directional embedding for one node, seen from the current
/// node: sin/cos of the bearing relative to the agent heading (zero for the
/// current node itself), distance
/// in units of 10 m, and sin/cos of the agent heading.
inline constexpr int kDirectionFeatures = 5;

/// Pairwise Euclidean distances between memory nodes in ordered_nodes()
/// order; the stop node sits at the agent position.
Tensor affinity_distances(const GraphMemory& mem);

/// Per node: mean over contributing views of (latent + E^d + E^s); the stop
/// node row is its learned embedding. Rows follow ordered_nodes().
Tensor node_inputs(const GraphMemory& mem, const PolicyModel& model);
/// node_inputs followed by the node-encoder self-attention stack.
Tensor encode_nodes(const GraphMemory& mem, const PolicyModel& model);
Tensor gasa_layer(const Tensor& x, const Tensor& distances, const GasaLayer& layer);
Tensor cross_modal_encode(const Tensor& nodes, const Tensor& instruction,
                          const Tensor& distances, const PolicyModel& model);

struct ActionScores {
  std::vector<NodeId> nodes;  // ordered_nodes()
  Tensor logits;              // [1×n]
  Mask mask;                  // false for visited nodes

  std::size_t index_of(NodeId id) const;
  /// Logits with masked entries replaced by −inf.
  std::vector<double> masked() const;
};

ActionScores score_actions(const Tensor& contextual, const GraphMemory& mem,
                           const PolicyModel& model);
/// Full forward pass for the current memory state.
ActionScores policy_scores(const GraphMemory& mem, const Tensor& instruction,
                           const PolicyModel& model);

enum class SelectMode { Greedy, Sample };

/// Highest unmasked score; ties go to the smallest node id.
NodeId greedy_action(const ActionScores& scores);
/// Draw from softmax(logits / temperature) over unmasked nodes.
NodeId sample_action(const ActionScores& scores, Rng& rng, double temperature);

struct Selection {
  NodeId target = kStopNode;
  std::vector<NodeId> route;
  bool stop() const { return target == kStopNode; }
};

Selection select_and_route(const ActionScores& scores, const GraphMemory& mem,
                           const EnvGraph& env, SelectMode mode, Rng* rng = nullptr,
                           double temperature = 1.0);

struct StepLog {
  int step = 0;
  NodeId current = 0;
  std::vector<NodeId> candidates;
  std::vector<double> scores;  // masked entries are −inf
  NodeId chosen = kStopNode;
  std::vector<NodeId> route;
};

struct Rollout {
  std::vector<NodeId> trajectory;
  std::vector<StepLog> steps;
  bool stopped = false;
};

/// Picks the next target given the state; may also record losses.
using Chooser =
    std::function<NodeId(int step, const GraphMemory& mem, const ActionScores& scores)>;

/// Generic episode driver: observe → latents → memory update → score →
/// choose, then walk the memory route hop by hop (updating heading and memory
/// at every node) until the chooser returns stop or `max_steps` decisions
/// have been made.
Rollout drive(const Episode& episode, const EnvGraph& env, const PolicyModel& model,
              LatentCache& latents, int max_steps, const Chooser& choose, bool keep_logs = false);

Rollout rollout(const Episode& episode, const EnvGraph& env, const PolicyModel& model,
                LatentCache& latents, SelectMode mode, int max_steps, std::uint64_t seed = 0,
                double temperature = 1.0, bool keep_logs = false);

/// Per-step rollout log as JSON Lines.
std::string rollout_log_jsonl(const Rollout& rollout);

}  // namespace navlab
