#include "doctest.h"
#include "navlab/config.hpp"
#include "navlab/error.hpp"

using namespace navlab;

TEST_CASE("defaults round-trip and hash stably") {
  RunConfig c;
  c.resolve();
  const auto j = config_to_json(c);
  const RunConfig back = config_from_json(j);
  CHECK(canonical_config(back) == canonical_config(c));
  CHECK(config_hash(back) == config_hash(c));
  RunConfig d = c;
  d.training.lambda = 0.3;
  CHECK(config_hash(d) != config_hash(c));
}

TEST_CASE("unknown keys and wrong types are rejected") {
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"bogus": 1})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"training": {"lamda": 1}})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"training": {"lambda": "x"}})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"training": {"batch_size": 0}})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"training": {"pseudo_label": "x"}})")), ConfigError);
}

TEST_CASE("partial documents override defaults") {
  const auto c = config_from_json(nlohmann::json::parse(R"({"policy": {"gasa_layers": 1}, "seed": 5})"));
  CHECK(c.policy.gasa_layers == 1);
  CHECK(c.seed == 5);
  CHECK(c.training.lambda == 0.2);
  CHECK(c.stage1_reference.lr_peak == 1e-5);
}

TEST_CASE("shared widths are resolved") {
  auto c = config_from_json(nlohmann::json::parse(R"({"world": {"landmarks": 7}, "latent": {"d_lm": 24}})"));
  CHECK(c.latent.landmark_vocab == 7);
  CHECK(c.policy.latent_dim == 24);
}
