#include "navlab/prompt.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "navlab/error.hpp"
#include "navlab/graph.hpp"
#include "navlab/rng.hpp"

namespace navlab {

std::string image_token_placeholder(int count) {
  return "[IMG_TOKENS:" + std::to_string(count) + "]";
}

std::string render_nav_prompt(std::string_view instruction, std::span<const double> angles,
                              int image_tokens) {
  std::ostringstream os;
  os << "You are navigating in an indoor environment given the instruction: <INST>" << instruction
     << "</INST>;\n";
  os << "The navigable locations are listed below: {\n";
  const auto placeholder = image_token_placeholder(image_tokens);
  for (std::size_t i = 0; i < angles.size(); ++i) {
    const double rounded = wrap_degrees(std::round(wrap_degrees(angles[i])));
    os << "    \"Candidate " << (i + 1) << ", facing " << static_cast<long>(rounded) << " degree, "
       << direction_word(direction_of(rounded)) << "\" : <IMG>" << placeholder << "</IMG>;\n";
  }
  os << "};\n";
  os << "Please choose the next direction.\n";
  return os.str();
}

std::string render_gpt4v_prompt(std::string_view instruction) {
  std::string out;
  out += kImagePlaceholder;
  out += "\n\nAs an AI navigating an indoor environment, you're given the task ";
  out += instruction;
  out +=
      ".\n\nYou find yourself at a particular juncture within the execution of this command. "
      "Based on your current observation of the surroundings, including obstacles, pathways, "
      "and relevant landmarks, determine the next step toward completing this task. Your "
      "response should briefly describe your immediate environment and specify the direction "
      "or action you will take to proceed. Summarize this in a concise paragraph, integrating "
      "both your observation and decision-making process.\n";
  return out;
}

std::vector<ReasoningRecord> sample_reasoning_steps(std::span<const Episode> episodes,
                                                    std::uint64_t seed, std::size_t k) {
  if (episodes.empty()) throw EmptyInputError("sample_reasoning_steps: no episodes");
  if (k == 0) throw ValidationError("sample_reasoning_steps: k must be at least 1");
  std::vector<std::pair<std::size_t, int>> population;
  for (std::size_t e = 0; e < episodes.size(); ++e) {
    const auto len = static_cast<int>(episodes[e].gt_path.size());
    if (len < 2) {
      throw ValidationError("sample_reasoning_steps: episode " + episodes[e].id +
                            " has fewer than two path nodes");
    }
    if (len == 2) {
      population.emplace_back(e, 0);
      continue;
    }
    for (int s = 1; s < len - 1; ++s) population.emplace_back(e, s);
  }
  Rng rng(seed);
  const std::size_t take = std::min(k, population.size());
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t j = i + uniform_index(rng, population.size() - i);
    std::swap(population[i], population[j]);
  }
  population.resize(take);
  std::sort(population.begin(), population.end());

  std::vector<ReasoningRecord> out;
  out.reserve(take);
  for (auto [e, step] : population) {
    const auto& ep = episodes[e];
    out.push_back(ReasoningRecord{ep.id, step, render_gpt4v_prompt(ep.instruction_text),
                                  ep.env_id + "/node_" + std::to_string(ep.gt_path[step]), ""});
  }
  return out;
}

}  // namespace navlab
