#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "navlab/episode.hpp"

namespace navlab {

/// Image-token slots have no text form; prompts show `[IMG_TOKENS:n]`.
std::string image_token_placeholder(int count);
inline constexpr std::string_view kImagePlaceholder = "[IMAGE]";

/// Navigation system prompt listing each candidate's heading-relative angle
/// (rounded to whole degrees) and direction word.
std::string render_nav_prompt(std::string_view instruction, std::span<const double> angles,
                              int image_tokens = 32);

/// Prompt used to request a single-step reasoning trace from a captioning model.
std::string render_gpt4v_prompt(std::string_view instruction);

struct ReasoningRecord {
  std::string episode_id;
  int step = 0;
  std::string prompt;
  std::string image_ref;
  std::string reasoning;
};

/// Uniform sample without replacement of k (episode, intermediate step)
/// pairs; k is capped at the population size. Steps exclude both path ends,
/// except on two-node paths where step 0 is the only choice.
std::vector<ReasoningRecord> sample_reasoning_steps(std::span<const Episode> episodes,
                                                    std::uint64_t seed, std::size_t k);

}  // namespace navlab
