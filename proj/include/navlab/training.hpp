#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "navlab/config.hpp"
#include "navlab/episode.hpp"
#include "navlab/latent.hpp"
#include "navlab/memory.hpp"
#include "navlab/policy.hpp"

namespace navlab {

struct LossConfig {
  double lambda = 0.2;
  bool dagger_enabled = true;
  double temperature = 1.0;
  PseudoLabelRule rule = PseudoLabelRule::MemoryPlusRemaining;
  double stop_radius = 3.0;
  int max_steps = 15;
};

LossConfig loss_config(const RunConfig& config);

/// Expert label on a partial map. Stop when the agent is at the goal or within
/// `stop_radius` of it; otherwise the unexplored node minimising
/// memory-path distance from the current node plus geodesic distance to the
/// goal (or only the latter under the Remaining rule). Ties go to the
/// smallest node id. Stop is also returned when no unexplored node is left.
NodeId pseudo_label(const GraphMemory& mem, const EnvGraph& env, NodeId goal,
                    double stop_radius = 3.0,
                    PseudoLabelRule rule = PseudoLabelRule::MemoryPlusRemaining);

/// Teacher-forced negative log-likelihood summed over the ground-truth path;
/// the last decision is labelled stop.
Tensor bc_loss(const Episode& episode, const EnvGraph& env, const PolicyModel& model,
               LatentCache& latents);

/// On-policy rollout sampled at `temperature`, labelled by pseudo_label at
/// every decision.
Tensor dagger_loss(const Episode& episode, const EnvGraph& env, const PolicyModel& model,
                   LatentCache& latents, std::uint64_t seed, const LossConfig& config);

/// λ·bc + dag.
double combine_losses(double lambda, double bc, double dag);

/// Linear warmup from `floor` to `peak` over `warmup` steps, then cosine decay
/// to zero at `total`.
struct LrSchedule {
  double floor = 1e-8;
  double peak = 1e-3;
  int warmup = 100;
  int total = 2000;

  double at(int step) const;
};

/// Adam with decoupled weight decay applied to every parameter.
class AdamW {
 public:
  AdamW(nn::ParameterList params, double beta1, double beta2, double eps, double weight_decay);

  void step(double lr);
  std::uint64_t steps_taken() const { return t_; }
  const nn::ParameterList& parameters() const { return params_; }
  std::vector<std::vector<double>>& first_moments() { return m_; }
  std::vector<std::vector<double>>& second_moments() { return v_; }
  const std::vector<std::vector<double>>& first_moments() const { return m_; }
  const std::vector<std::vector<double>>& second_moments() const { return v_; }
  void set_steps_taken(std::uint64_t t) { t_ = t; }

 private:
  nn::ParameterList params_;
  double beta1_, beta2_, eps_, weight_decay_;
  std::uint64_t t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

struct StepStats {
  int step = 0;
  double lr = 0.0;
  double loss_bc = 0.0;
  double loss_dag = 0.0;
  double total = 0.0;
};

/// Train/held-out worlds and episodes generated from the master seed.
struct Benchmark {
  Dataset train;
  Dataset eval;
};

Benchmark generate_benchmark(const RunConfig& config);
/// Loads data from the configured paths, generating whatever is left empty.
Benchmark load_or_generate(const RunConfig& config);

class Trainer {
 public:
  Trainer(RunConfig config, PolicyModel& model, LatentProvider& provider, const Dataset& train);

  /// One optimizer step over the next minibatch.
  StepStats step();
  int current_step() const { return step_; }
  const RunConfig& config() const { return config_; }
  AdamW& optimizer() { return optimizer_; }
  const AdamW& optimizer() const { return optimizer_; }
  void set_step(int step) { step_ = step; }
  LatentCache& cache() { return cache_; }

  /// Episode index used at (global slot) position `slot` of the epoch stream.
  std::size_t episode_for(std::uint64_t slot) const;

 private:
  RunConfig config_;
  PolicyModel& model_;
  LatentProvider& provider_;
  const Dataset& train_;
  nn::ParameterList params_;
  AdamW optimizer_;
  LrSchedule schedule_;
  LatentCache cache_;
  int step_ = 0;
  mutable std::uint64_t cached_epoch_ = ~0ull;
  mutable std::vector<std::size_t> order_;
};

/// All trainable state of a run.
nn::ParameterList model_parameters(const PolicyModel& model, const LatentProvider& provider);

}  // namespace navlab
