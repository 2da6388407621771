#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace navlab {

using Rng = std::mt19937_64;

std::uint64_t fnv1a64(std::span<const unsigned char> bytes,
                      std::uint64_t seed = 0xcbf29ce484222325ull);
std::uint64_t fnv1a64(std::string_view text);

/// Seed for a named sub-stream of a master seed, so that consumers never
/// perturb one another.
std::uint64_t stream_seed(std::uint64_t master, std::string_view name, std::uint64_t index = 0);

inline Rng make_stream(std::uint64_t master, std::string_view name, std::uint64_t index = 0) {
  return Rng(stream_seed(master, name, index));
}

double uniform(Rng& rng, double lo, double hi);
/// Uniform integer in [0, n).
std::size_t uniform_index(Rng& rng, std::size_t n);

}  // namespace navlab
