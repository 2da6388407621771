#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "navlab/config.hpp"
#include "navlab/error.hpp"
#include "navlab/nn.hpp"

namespace navlab {

class CheckpointVersionError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

class CheckpointCorruptError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct TensorRecord {
  std::string name;
  Shape shape;
  std::vector<double> values;
};

/// Everything needed to resume a run. Sampling streams are derived from
/// (seed, step), so those two numbers are the full RNG state.
struct Checkpoint {
  std::uint32_t version = kCheckpointVersion;
  std::uint64_t config_hash = 0;
  std::string config_json;
  std::uint64_t step = 0;
  std::uint64_t seed = 0;
  std::vector<TensorRecord> tensors;
  std::uint64_t adam_steps = 0;
  std::vector<TensorRecord> adam_m;
  std::vector<TensorRecord> adam_v;
};

class Trainer;
class PolicyModel;
class LatentProvider;

Checkpoint capture(const RunConfig& config, const nn::ParameterList& params, const Trainer* trainer);

/// Copies tensors by name into `params`; every parameter must be present with
/// a matching shape.
void restore_parameters(const Checkpoint& ckpt, const nn::ParameterList& params);
void restore_trainer(const Checkpoint& ckpt, Trainer& trainer);

std::vector<unsigned char> serialize(const Checkpoint& ckpt);
/// Throws CheckpointVersionError or CheckpointCorruptError.
Checkpoint deserialize(std::span<const unsigned char> bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Hex FNV-1a of the file bytes.
std::string file_hash(const std::filesystem::path& path);

}  // namespace navlab
