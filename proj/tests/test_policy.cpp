#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "navlab/error.hpp"
#include "navlab/policy.hpp"

using namespace navlab;
using testing_support::dummy_views;
using testing_support::random_world;

namespace {

EnvGraph line_world() {
  std::vector<EnvNode> nodes{{{0, 0}, 0}, {{0, 4}, 1}, {{4, 4}, 2}, {{-4, 0}, 3}};
  return EnvGraph("line", nodes, {{0, 1}, {1, 2}, {0, 3}});
}

LatentConfig tiny_latent() {
  LatentConfig c;
  c.landmark_vocab = 6;
  c.d_v = 6;
  c.d_q = 6;
  c.d_lm = 8;
  c.num_queries = 4;
  return c;
}

PolicyConfig tiny_policy() {
  PolicyConfig c;
  c.hidden = 8;
  c.ffn_hidden = 12;
  c.latent_dim = 8;
  return c;
}

}  // namespace

TEST_CASE("memory tracks visited, unexplored and stop nodes") {
  const auto env = line_world();
  GraphMemory mem;
  auto obs = observe(env, 0, 0.0);
  mem.update(env, 0, 0.0, obs, dummy_views(obs));
  CHECK(mem.ordered_nodes() == std::vector<NodeId>{0, 1, 3, kStopNode});
  CHECK(mem.unexplored() == std::vector<NodeId>{1, 3});
  CHECK(mem.status(kStopNode) == NodeStatus::Stop);
  CHECK(mem.node(kStopNode).visit_order == kStopOrder);
  CHECK_THROWS_AS(mem.update(env, 2, 0.0, observe(env, 2, 0.0), {}), IllegalMoveError);

  obs = observe(env, 1, 0.0);
  mem.update(env, 1, 0.0, obs, dummy_views(obs));
  CHECK(mem.status(1) == NodeStatus::Visited);
  CHECK(mem.node(1).visit_order == 2);
  CHECK(mem.node(2).views.size() == 1);
  CHECK(mem.route_to(env, 3) == std::vector<NodeId>{0, 3});
  CHECK(mem.route_to(env, kStopNode).empty());
  CHECK_THROWS_AS(mem.node(42), ReferenceError);

  // Revisits only move the agent.
  mem.update(env, 0, 180.0, Observation{0, 180.0, {}}, {});
  CHECK(mem.current() == 0);
  CHECK(mem.visited_count() == 2);
  CHECK(mem.node(0).visit_order == 1);
}

TEST_CASE("affinity distances put stop at the agent") {
  const auto env = line_world();
  GraphMemory mem;
  auto obs = observe(env, 0, 0.0);
  mem.update(env, 0, 0.0, obs, dummy_views(obs));
  const Tensor d = affinity_distances(mem);
  CHECK(d.shape() == Shape{4, 4});
  CHECK(d.at(0, 3) == 0.0);
  CHECK(d.at(1, 3) == doctest::Approx(4.0));
  CHECK(d.at(1, 2) == doctest::Approx(std::sqrt(32.0)));
}

TEST_CASE("GASA with zero affinity equals the plain attention sublayer") {
  Rng rng(21);
  PolicyConfig cfg = tiny_policy();
  PolicyModel model(cfg, 3);
  GasaLayer g = model.cross_layers[0].gasa;
  g.w = Tensor::parameter({1}, {0.0});
  g.b = Tensor::parameter({1}, {0.0});
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> xv(5 * 8), dv(25);
    for (auto& v : xv) v = uniform(rng, -2.0, 2.0);
    for (auto& v : dv) v = uniform(rng, 0.0, 30.0);
    Tensor x({5, 8}, xv), dist({5, 5}, dv);
    const Tensor got = gasa_layer(x, dist, g);
    const Tensor want = g.layer(x);
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(std::abs(got.values()[i] - want.values()[i]) < 1e-10);
  }
  CHECK_THROWS_AS(gasa_layer(Tensor::zeros({3, 8}), Tensor::zeros({2, 2}), g), DimensionError);
}

TEST_CASE("visited nodes are masked and stop is always allowed") {
  const auto env = line_world();
  LatentProvider provider(tiny_latent(), 1);
  PolicyModel model(tiny_policy(), 2);
  LatentCache cache(provider);
  Episode ep{"e", "line", {0, 5, 1, 6}, "", 0, 2, {0, 1, 2}};
  Rollout r = rollout(ep, env, model, cache, SelectMode::Greedy, 6, 0, 1.0, true);
  REQUIRE_FALSE(r.steps.empty());
  const auto& s0 = r.steps[0];
  CHECK(s0.candidates == std::vector<NodeId>{0, 1, 3, kStopNode});
  CHECK(std::isinf(s0.scores[0]));
  CHECK(std::isfinite(s0.scores[3]));
  const auto jsonl = rollout_log_jsonl(r);
  CHECK(jsonl.find("\"scores\":[null") != std::string::npos);
}

TEST_CASE("greedy ties go to the smallest node id") {
  ActionScores s;
  s.nodes = {2, 5, 9, kStopNode};
  s.logits = Tensor::matrix(1, 4, {1.0, 3.0, 3.0, 3.0});
  s.mask = Mask::row({true, true, true, true});
  CHECK(greedy_action(s) == 5);
  s.mask = Mask::row({true, false, true, true});
  CHECK(greedy_action(s) == 9);
  Rng rng(1);
  for (int i = 0; i < 50; ++i) CHECK(sample_action(s, rng, 0.5) != 5);
  CHECK_THROWS_AS(sample_action(s, rng, 0.0), ValidationError);
}

TEST_CASE("random-model rollouts stay on edges and never pick visited nodes") {
  Rng rng(99);
  LatentProvider provider(tiny_latent(), 8);
  for (int trial = 0; trial < 20; ++trial) {
    const auto env = random_world(rng, 10, 8);
    PolicyModel model(tiny_policy(), 100 + trial);
    LatentCache cache(provider);
    Episode ep{"e", "w", {0, 4, 2, 5}, "", static_cast<NodeId>(trial % 10), 0, {}};
    const auto r = rollout(ep, env, model, cache, SelectMode::Sample, 15, trial, 1.0, true);
    for (std::size_t i = 0; i + 1 < r.trajectory.size(); ++i) {
      if (r.trajectory[i] != r.trajectory[i + 1]) CHECK(env.has_edge(r.trajectory[i], r.trajectory[i + 1]));
    }
    for (const auto& s : r.steps) {
      if (s.chosen == kStopNode) continue;
      const auto at = std::find(s.candidates.begin(), s.candidates.end(), s.chosen) - s.candidates.begin();
      CHECK(std::isfinite(s.scores[at]));
    }
  }
}

TEST_CASE("policy forward is deterministic for a seed") {
  const auto env = line_world();
  LatentProvider provider(tiny_latent(), 1);
  PolicyModel a(tiny_policy(), 7), b(tiny_policy(), 7);
  LatentCache ca(provider), cb(provider);
  Episode ep{"e", "line", {0, 5}, "", 0, 1, {0, 1}};
  const auto ra = rollout(ep, env, a, ca, SelectMode::Sample, 5, 3, 1.0, true);
  const auto rb = rollout(ep, env, b, cb, SelectMode::Sample, 5, 3, 1.0, true);
  CHECK(ra.trajectory == rb.trajectory);
  CHECK(rollout_log_jsonl(ra) == rollout_log_jsonl(rb));
}

TEST_CASE("projection is created only when widths differ") {
  PolicyConfig cfg = tiny_policy();
  CHECK_FALSE(PolicyModel(cfg, 1).latent_projection.has_value());
  cfg.latent_dim = 10;
  CHECK(PolicyModel(cfg, 1).latent_projection.has_value());
  cfg.hidden = 0;
  CHECK_THROWS_AS(PolicyModel(cfg, 1), ConfigError);
}
