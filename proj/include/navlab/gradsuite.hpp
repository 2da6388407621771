#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace navlab {

struct GradSuiteEntry {
  std::string name;
  int trials = 0;
  std::size_t coordinates = 0;
  double max_rel_error = 0.0;
  std::string worst;  // parameter holding the worst coordinate
};

/// Finite-difference checks of every differentiable primitive and module over
/// `trials` random seeds each, plus the full λ·BC + DAgger rollout loss on a
/// three-node world with a trainable provider.
std::vector<GradSuiteEntry> run_grad_suite(std::uint64_t seed, int trials);

/// The end-to-end rollout-loss check alone.
GradSuiteEntry rollout_grad_check(std::uint64_t seed);

}  // namespace navlab
