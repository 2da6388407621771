#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "json.hpp"
#include "navlab/latent.hpp"
#include "navlab/policy.hpp"

namespace navlab {

struct WorldConfig {
  int landmarks = 12;
  int nodes = 30;
  double radius = 6.5;
  int min_hops = 2;
  int max_hops = 4;
};

/// Either paths to existing files, or counts for generating a benchmark from
/// the master seed when the paths are empty.
struct DataConfig {
  std::string train_envs;
  std::string train_episodes;
  std::string eval_envs;
  std::string eval_episodes;
  int train_worlds = 20;
  int train_episodes_per_world = 20;
  int eval_worlds = 5;
  int eval_episodes_per_world = 20;
};

enum class PseudoLabelRule { MemoryPlusRemaining, Remaining };

struct TrainingConfig {
  double lambda = 0.2;
  bool dagger = true;
  /// Steps of BC-only training before on-policy rollouts start.
  int dagger_start = 0;
  /// Alternate BC-only and DAgger-only steps instead of summing both.
  bool alternate = false;
  double temperature = 1.0;
  /// Pseudo-label stops within this geodesic distance of the goal; negative
  /// means evaluation.success_threshold.
  double stop_radius = -1.0;
  PseudoLabelRule pseudo_label = PseudoLabelRule::MemoryPlusRemaining;
  double lr_peak = 1e-3;
  double lr_floor = 1e-8;
  int warmup_steps = 100;
  int total_steps = 2000;
  int batch_size = 2;
  double weight_decay = 0.05;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  int eval_every = 0;
  int checkpoint_every = 0;
};

struct EvalConfig {
  int max_steps = 15;
  double success_threshold = 3.0;
  /// 0 = NAVLAB_THREADS / OpenMP default.
  int threads = 0;
};

/// Stage-one schedule of the original system, kept for reference only.
struct Stage1Reference {
  int steps = 200000;
  int warmup_steps = 1000;
  double lr_peak = 1e-5;
  double lr_floor = 1e-8;
  int batch_size = 8;
};

struct RunConfig {
  std::uint64_t seed = 20240917;
  WorldConfig world;
  DataConfig data;
  LatentConfig latent;
  PolicyConfig policy;
  TrainingConfig training;
  EvalConfig evaluation;
  std::string output_dir = "runs/default";
  Stage1Reference stage1_reference;

  /// Copies shared values (landmark vocab, latent width) into the module configs.
  void resolve();
};

/// Strict parse: unknown keys anywhere throw ConfigError.
RunConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const RunConfig& config);
RunConfig load_config(const std::filesystem::path& path);
/// Compact canonical form used for hashing. Omits output_dir and
/// evaluation.threads.
std::string canonical_config(const RunConfig& config);
std::uint64_t config_hash(const RunConfig& config);

}  // namespace navlab
