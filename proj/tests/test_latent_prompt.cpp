#include <string>

#include "doctest.h"
#include "navlab/error.hpp"
#include "navlab/io.hpp"
#include "navlab/latent.hpp"
#include "navlab/prompt.hpp"

using namespace navlab;

namespace {

std::string golden(const std::string& name) {
  return io::read_text(std::string(NAVLAB_GOLDEN_DIR) + "/" + name);
}

LatentConfig tiny() {
  LatentConfig c;
  c.landmark_vocab = 5;
  c.d_v = 6;
  c.d_q = 6;
  c.d_lm = 8;
  c.num_queries = 4;
  return c;
}

Observation two_views() {
  return Observation{0, 0.0, {{1, 2, 10.0, Direction::Front}, {2, 4, 100.0, Direction::Right}}};
}

}  // namespace

TEST_CASE("navigation prompt matches the golden file") {
  const double angles[] = {0.0, 90.0};
  CHECK(render_nav_prompt("go front to landmark 3, then go right to landmark 7", angles, 32) ==
        golden("nav_prompt_two_candidates.txt"));
}

TEST_CASE("reasoning prompt matches the golden file") {
  const auto text = render_gpt4v_prompt("go front to landmark 3, then go right to landmark 7");
  CHECK(text == golden("gpt4v_prompt.txt"));
  CHECK(text.find("determine the next step toward completing this task") != std::string::npos);
}

TEST_CASE("prompt angles are rounded and wrapped") {
  const double angles[] = {359.6, -90.2, 44.5};
  const auto p = render_nav_prompt("x", angles, 4);
  CHECK(p.find("facing 0 degree, front") != std::string::npos);
  CHECK(p.find("facing 270 degree, left") != std::string::npos);
  CHECK(p.find("facing 45 degree, right") != std::string::npos);
  CHECK(p.find("[IMG_TOKENS:4]") != std::string::npos);
}

TEST_CASE("reasoning sampler excludes path ends") {
  std::vector<Episode> eps{{"a", "w", {}, "t", 0, 3, {0, 1, 2, 3}}, {"b", "w", {}, "t", 5, 6, {5, 6}}};
  const auto all = sample_reasoning_steps(eps, 1, 100);
  REQUIRE(all.size() == 3);
  CHECK(all[0].step == 1);
  CHECK(all[1].step == 2);
  CHECK(all[2].episode_id == "b");
  CHECK(all[2].step == 0);
  CHECK(all[0].image_ref == "w/node_1");
  const auto one = sample_reasoning_steps(eps, 9, 1);
  CHECK(one.size() == 1);
  CHECK(sample_reasoning_steps(eps, 9, 1)[0].step == one[0].step);
  CHECK_THROWS_AS(sample_reasoning_steps({}, 1, 1), EmptyInputError);
}

TEST_CASE("provider output shapes") {
  LatentProvider p(tiny(), 3);
  const std::vector<int> tokens{0, 5, 1, 7};
  const auto q = p.qformer_encode(p.featurize_view({1, 2, 10.0, Direction::Front}), tokens);
  CHECK(q.queries.shape() == Shape{4, 6});
  CHECK(q.image_tokens.shape() == Shape{4, 8});
  const auto lm = p.encode(two_views(), tokens);
  CHECK(lm.instruction.shape() == Shape{4, 8});
  REQUIRE(lm.merged.size() == 2);
  CHECK(lm.merged[0].shape() == Shape{1, 8});
  CHECK(lm.view_tokens[1].shape() == Shape{4, 8});
}

TEST_CASE("provider rejects bad tokens, landmarks and lengths") {
  auto cfg = tiny();
  cfg.max_seq_len = 9;
  LatentProvider p(cfg, 3);
  CHECK_THROWS_AS(p.encode(two_views(), std::vector<int>{}), LengthError);
  CHECK_THROWS_AS(p.encode(two_views(), std::vector<int>{0, 9}), VocabError);
  CHECK_THROWS_AS(p.featurize_view({1, 5, 0.0, Direction::Front}), VocabError);
  // 2 instruction tokens + 2 views × 4 queries = 10 > 9.
  CHECK_THROWS_AS(p.encode(two_views(), std::vector<int>{0, 5}), LengthError);
}

TEST_CASE("causal encoding leaves earlier positions untouched by later ones") {
  auto cfg = tiny();
  cfg.causal = true;
  LatentProvider p(cfg, 4);
  const auto a = p.encode(two_views(), std::vector<int>{0, 5, 1, 7});
  Observation other = two_views();
  other.candidates[1].landmark = 0;
  const auto b = p.encode(other, std::vector<int>{0, 5, 1, 7});
  for (std::size_t i = 0; i < a.instruction.size(); ++i) {
    CHECK(a.instruction.values()[i] == b.instruction.values()[i]);
  }
  CHECK(a.merged[0].values()[0] == b.merged[0].values()[0]);
  CHECK(a.merged[1].values()[0] != b.merged[1].values()[0]);
}

TEST_CASE("cache returns the provider output and memoises it") {
  LatentProvider p(tiny(), 5);
  LatentCache cache(p);
  Episode ep{"e", "w", {0, 5, 1, 7}, "", 0, 1, {0, 1}};
  const auto a = cache.fetch(ep, two_views());
  const auto direct = p.encode(two_views(), ep.instruction_tokens);
  CHECK(a.merged[1].values()[3] == direct.merged[1].values()[3]);
  cache.fetch(ep, two_views());
  CHECK(cache.size() == 1);
  ep.instruction_tokens[1] = 6;
  cache.fetch(ep, two_views());
  CHECK(cache.size() == 2);
  CHECK_FALSE(a.merged[0].requires_grad());
}
