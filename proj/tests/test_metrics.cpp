#include <cmath>

#include "doctest.h"
#include "navlab/error.hpp"
#include "navlab/metrics.hpp"
#include "navlab/training.hpp"
#include "oracles.hpp"

using namespace navlab;

namespace {

// 0 -3m- 1 -4m- 2 -5m- 3, plus a 0-3 shortcut.
EnvGraph track() {
  std::vector<EnvNode> nodes{{{0, 0}, 0}, {{3, 0}, 0}, {{3, 4}, 0}, {{3, 9}, 0}};
  return EnvGraph("track", nodes, {{0, 1}, {1, 2}, {2, 3}});
}

std::vector<std::vector<NodeId>> walks(const EnvGraph& env, std::size_t max_len) {
  std::vector<std::vector<NodeId>> out, frontier;
  for (NodeId i = 0; i < static_cast<NodeId>(env.node_count()); ++i) frontier.push_back({i});
  while (!frontier.empty()) {
    std::vector<std::vector<NodeId>> next;
    for (auto& w : frontier) {
      out.push_back(w);
      if (w.size() == max_len) continue;
      for (const auto& nb : env.neighbors(w.back())) {
        auto x = w;
        x.push_back(nb.node);
        next.push_back(std::move(x));
      }
    }
    frontier = std::move(next);
  }
  return out;
}

}  // namespace

TEST_CASE("DTW dynamic programme equals exhaustive warping") {
  const auto env = track();
  const auto all = walks(env, 5);
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = 0; j < all.size(); ++j) {
      const auto& a = all[i];
      const auto& b = all[j];
      std::vector<std::vector<double>> cost(a.size(), std::vector<double>(b.size()));
      for (std::size_t x = 0; x < a.size(); ++x)
        for (std::size_t y = 0; y < b.size(); ++y) cost[x][y] = env.geodesic(a[x], b[y]);
      REQUIRE(dtw(env, a, b) == doctest::Approx(oracle::exhaustive_dtw(cost)).epsilon(1e-12));
      ++pairs;
    }
  }
  CHECK(pairs == all.size() * all.size());
}

TEST_CASE("trajectory length and its errors") {
  const auto env = track();
  const std::vector<NodeId> t{0, 1, 1, 2, 1};
  CHECK(trajectory_length(env, t) == doctest::Approx(11.0));
  CHECK_THROWS_AS(trajectory_length(env, std::vector<NodeId>{0, 2}), TrajectoryError);
  CHECK_THROWS_AS(trajectory_length(env, std::vector<NodeId>{}), TrajectoryError);
}

TEST_CASE("success threshold is strict") {
  const auto env = track();
  // Node 1 is exactly 3 m from node 0.
  CHECK_FALSE(success(env, std::vector<NodeId>{1}, 0));
  CHECK(success(env, std::vector<NodeId>{1}, 0, 3.0 + 1e-9));
  CHECK_FALSE(oracle_success(env, std::vector<NodeId>{1, 2}, 0));
  CHECK(navigation_error(env, std::vector<NodeId>{0, 1, 2}, 0) == doctest::Approx(7.0));
}

TEST_CASE("episode metric relations") {
  const auto env = track();
  const Episode ep{"e", "track", {}, "", 0, 3, {0, 1, 2, 3}};
  const auto perfect = episode_metrics(env, ep, {0, 1, 2, 3});
  CHECK(perfect.success);
  CHECK(perfect.spl == doctest::Approx(1.0));
  CHECK(perfect.ndtw == doctest::Approx(1.0));
  CHECK(perfect.sdtw == doctest::Approx(1.0));
  const auto detour = episode_metrics(env, ep, {0, 1, 0, 1, 2, 3});
  CHECK(detour.spl == doctest::Approx(12.0 / 18.0));
  CHECK(detour.ndtw < 1.0);
  const auto lost = episode_metrics(env, ep, {0, 1});
  CHECK_FALSE(lost.success);
  CHECK(lost.spl == 0.0);
  CHECK(lost.sdtw == 0.0);
  CHECK(lost.ndtw == doctest::Approx(std::exp(-dtw(env, std::vector<NodeId>{0, 1}, ep.gt_path) / 12.0)));
  const Episode here{"h", "track", {}, "", 2, 2, {2}};
  CHECK(spl(env, std::vector<NodeId>{2}, here) == 1.0);
}

TEST_CASE("summary percentages and CSV layout") {
  std::vector<EpisodeMetrics> rows(3);
  rows[0].success = rows[0].oracle_success = true;
  rows[0].spl = 1.0;
  rows[1].oracle_success = true;
  rows[2].tl = 3.0;
  const auto s = summarize(rows);
  CHECK(s.sr == 33.33);
  CHECK(s.osr == 66.67);
  CHECK(s.spl == 33.33);
  CHECK(s.tl == doctest::Approx(1.0));
  CHECK(summary_csv_row(s) == "1.00,0.00,66.67,33.33,33.33,0.0000,0.0000");
  CHECK(std::string(kReportCsvHeader) == "TL,NE,OSR,SR,SPL,nDTW,sDTW");
  CHECK_THROWS_AS(summarize(std::vector<EpisodeMetrics>{}), EmptyInputError);
}

TEST_CASE("parallel evaluation equals serial evaluation") {
  RunConfig c;
  c.data.eval_worlds = 2;
  c.data.eval_episodes_per_world = 8;
  c.data.train_worlds = 1;
  c.data.train_episodes_per_world = 1;
  c.latent.num_queries = 4;
  c.latent.d_lm = 16;
  c.policy.hidden = 16;
  c.policy.ffn_hidden = 16;
  c.resolve();
  const auto bench = generate_benchmark(c);
  LatentProvider provider(c.latent, 1);
  PolicyModel model(c.policy, 2);
  LatentCache serial_cache(provider), parallel_cache(provider);
  const auto serial = evaluate(model, serial_cache, bench.eval, c.evaluation, 1);
  const auto parallel = evaluate(model, parallel_cache, bench.eval, c.evaluation, 4);
  CHECK(report_to_json(serial).dump() == report_to_json(parallel).dump());

  Dataset missing = bench.eval;
  missing.episodes[0].env_id = "nowhere";
  CHECK_THROWS_AS(evaluate(model, serial_cache, missing, c.evaluation, 1), ReferenceError);
}
