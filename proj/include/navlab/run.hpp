#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "navlab/checkpoint.hpp"
#include "navlab/config.hpp"
#include "navlab/metrics.hpp"
#include "navlab/training.hpp"

namespace navlab {

/// Provider and policy initialised from the config's named init streams.
struct Agent {
  Agent(const RunConfig& config);

  nn::ParameterList parameters() const { return model_parameters(policy, provider); }

  LatentProvider provider;
  PolicyModel policy;
};

struct TrainOptions {
  std::filesystem::path output_dir;
  /// Resume from this checkpoint instead of starting fresh.
  std::optional<std::filesystem::path> resume;
  /// Stop after this many total steps (defaults to training.total_steps).
  std::optional<int> stop_at;
  /// Held-out data for periodic evaluation.
  const Dataset* eval_data = nullptr;
  std::function<void(const std::string&)> log;
};

struct TrainResult {
  std::filesystem::path checkpoint;
  std::string checkpoint_hash;
  StepStats last;
};

TrainResult train_run(const RunConfig& config, const Dataset& train, Agent& agent,
                      const TrainOptions& options);

/// Rebuilds the agent recorded in a checkpoint.
struct LoadedAgent {
  RunConfig config;
  std::unique_ptr<Agent> agent;
};
LoadedAgent load_agent(const std::filesystem::path& checkpoint);

}  // namespace navlab
