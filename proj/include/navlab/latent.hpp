#pragma once

#include <cstdint>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "navlab/episode.hpp"
#include "navlab/graph.hpp"
#include "navlab/nn.hpp"

// Small randomly initialised stand-in for a frozen vision-language model.
// Views are featurised by table lookup, compressed into query tokens by a
// Q-former style block, projected into the "LM" width, and encoded together
// with the instruction by a bidirectional transformer encoder. Each view's
// query tokens are then merged into one latent by an MLP.

namespace navlab {

struct LatentConfig {
  int landmark_vocab = 12;
  int d_v = 32;
  int d_q = 32;
  int d_lm = 64;
  int num_queries = 32;
  int qformer_depth = 1;
  int encoder_depth = 2;
  int heads = 1;
  int ffn_mult = 2;
  bool causal = false;
  bool position_encoding = true;
  /// Provider weights are frozen unless this is set.
  bool trainable = false;
  int max_seq_len = 1024;
};

struct ViewFeature {
  Tensor vector;  // [1×d_v]
};

struct QueryLatents {
  Tensor queries;       // instruction-aware queries [num_queries×d_q]
  Tensor image_tokens;  // after projection [num_queries×d_lm]
};

struct LmLatents {
  std::vector<Tensor> view_tokens;  // per view [num_queries×d_lm]
  Tensor instruction;               // [L×d_lm]
  std::vector<Tensor> merged;       // per view [1×d_lm]
};

/// The parts of LmLatents the policy consumes.
struct StepLatents {
  std::vector<Tensor> merged;
  Tensor instruction;
};

class LatentProvider {
 public:
  LatentProvider(const LatentConfig& config, std::uint64_t seed);

  const LatentConfig& config() const { return config_; }
  int vocabulary() const { return vocabulary_size(config_.landmark_vocab); }

  /// Landmark table row plus direction-bin table row. Throws VocabError for
  /// landmarks outside the vocabulary.
  ViewFeature featurize_view(const Candidate& candidate) const;
  QueryLatents qformer_encode(const ViewFeature& view, std::span<const int> tokens) const;
  /// Token embeddings (plus positions when enabled) fed to the encoder.
  Tensor instruction_embeddings(std::span<const int> tokens) const;
  LmLatents lm_encode(std::span<const Tensor> image_tokens, std::span<const int> tokens) const;

  /// featurize → qformer → lm_encode for every candidate of an observation.
  LmLatents encode(const Observation& obs, std::span<const int> tokens) const;

  nn::ParameterList parameters() const;
  void set_trainable(bool trainable);

  // Frozen "vision encoder" tables; never trained.
  Tensor landmark_table;  // [V×d_v]
  Tensor angle_table;     // [4×d_v]

  struct QFormerBlock {
    nn::EncoderLayer self;
    nn::Attention cross;
    nn::LayerNorm cross_norm;
    nn::FeedForward ffn;
    nn::LayerNorm ffn_norm;
  };

  Tensor queries;         // [num_queries×d_q]
  Tensor q_token_embed;   // [vocab×d_q]
  std::vector<QFormerBlock> qformer;
  nn::Linear projection;  // d_q → d_lm
  Tensor lm_token_embed;  // [vocab×d_lm]
  std::vector<nn::EncoderLayer> encoder;
  nn::FeedForward merge;  // d_lm → d_lm → d_lm

 private:
  void check_tokens(std::span<const int> tokens) const;

  LatentConfig config_;
  Tensor positions_;
};

/// Memoises frozen provider outputs per (instruction, candidate landmarks and
/// direction bins).
/// Trainable providers bypass the cache so gradients reach their weights.
class LatentCache {
 public:
  explicit LatentCache(const LatentProvider& provider) : provider_(&provider) {}

  StepLatents fetch(const Episode& episode, const Observation& obs);
  std::size_t size() const;
  void clear();

 private:
  const LatentProvider* provider_;
  mutable std::mutex mutex_;
  std::unordered_map<std::string, StepLatents> entries_;
};

}  // namespace navlab
