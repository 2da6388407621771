#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "navlab/error.hpp"
#include "navlab/graph.hpp"
#include "oracles.hpp"

using namespace navlab;
using testing_support::random_world;

TEST_CASE("bearing is clockwise from +y") {
  CHECK(bearing_degrees({0, 0}, {0, 1}) == doctest::Approx(0.0));
  CHECK(bearing_degrees({0, 0}, {1, 0}) == doctest::Approx(90.0));
  CHECK(bearing_degrees({0, 0}, {0, -1}) == doctest::Approx(180.0));
  CHECK(bearing_degrees({0, 0}, {-1, 0}) == doctest::Approx(270.0));
}

TEST_CASE("direction bins and their edges") {
  CHECK(direction_of(0.0) == Direction::Front);
  CHECK(direction_of(44.999) == Direction::Front);
  CHECK(direction_of(45.0) == Direction::Right);
  CHECK(direction_of(135.0) == Direction::Rear);
  CHECK(direction_of(225.0) == Direction::Left);
  CHECK(direction_of(315.0) == Direction::Front);
  CHECK(direction_of(-10.0) == Direction::Front);
  CHECK(direction_of(-90.0) == Direction::Left);
  CHECK(wrap_degrees(720.0) == 0.0);
  CHECK(wrap_degrees(-1e-18) == 0.0);
}

TEST_CASE("env graph validation") {
  std::vector<EnvNode> nodes{{{0, 0}, 0}, {{3, 4}, 1}, {{6, 8}, 2}};
  CHECK_THROWS_AS(EnvGraph("x", nodes, {{0, 1}}), ValidationError);
  CHECK_THROWS_AS(EnvGraph("x", nodes, {{0, 1}, {1, 1}, {1, 2}}), ValidationError);
  CHECK_THROWS_AS(EnvGraph("x", nodes, {{0, 1}, {1, 0}, {1, 2}}), ValidationError);
  CHECK_THROWS_AS(EnvGraph("x", nodes, {{0, 3}, {1, 2}}), ValidationError);
  EnvGraph g("x", nodes, {{0, 1}, {1, 2}});
  CHECK(*g.edge_length(0, 1) == doctest::Approx(5.0));
  CHECK_FALSE(g.edge_length(0, 2).has_value());
  CHECK(g.geodesic(0, 2) == doctest::Approx(10.0));
  CHECK_THROWS_AS(g.geodesic(0, 7), ReferenceError);
}

TEST_CASE("disconnected shortest path throws") {
  WeightedGraph g(3);
  g.add_edge(0, 1, 1.0);
  CHECK_THROWS_AS(shortest_path(g, 0, 2), DisconnectedError);
  CHECK(shortest_path(g, 1, 1).path == std::vector<NodeId>{1});
}

TEST_CASE("shortest path agrees with exhaustive enumeration") {
  Rng rng(7);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + static_cast<int>(uniform_index(rng, 9));
    const auto env = random_world(rng, n, n);
    for (NodeId a = 0; a < n; ++a) {
      for (NodeId b = 0; b < n; ++b) {
        const auto got = shortest_path(env, a, b);
        const auto want = oracle::all_simple_paths_min(env.graph(), a, b);
        REQUIRE(got.path == want.path);
        CHECK(got.length == doctest::Approx(want.length).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("ties resolve to the lexicographically smallest path") {
  // Unit square: 0→3 has two equal routes via 1 or via 2.
  std::vector<EnvNode> nodes{{{0, 0}, 0}, {{1, 0}, 0}, {{0, 1}, 0}, {{1, 1}, 0}};
  EnvGraph env("sq", nodes, {{0, 1}, {0, 2}, {1, 3}, {2, 3}});
  CHECK(shortest_path(env, 0, 3).path == std::vector<NodeId>{0, 1, 3});
  CHECK(shortest_path(env, 3, 0).path == std::vector<NodeId>{3, 1, 0});
}

TEST_CASE("geodesic table matches Floyd-Warshall") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto env = generate_env(seed, 30, 6.5, 12);
    const auto fw = oracle::floyd_warshall(env.graph());
    const std::size_t n = env.node_count();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        CHECK(env.geodesic(NodeId(i), NodeId(j)) == doctest::Approx(fw[i * n + j]).epsilon(1e-12));
  }
}

TEST_CASE("generated worlds are deterministic and connected") {
  const auto a = generate_env(42, 25, 5.0, 8);
  const auto b = generate_env(42, 25, 5.0, 8);
  CHECK(a.edges() == b.edges());
  CHECK(a.id() == "env_42");
  for (NodeId i = 0; i < 25; ++i) {
    CHECK(a.position(i).x == b.position(i).x);
    CHECK(a.landmark(i) == b.landmark(i));
    CHECK(std::isfinite(a.geodesic(0, i)));
  }
  // A tiny radius forces every edge to come from component bridging.
  const auto sparse = generate_env(3, 12, 0.01, 4);
  CHECK(sparse.edges().size() == 11);
  CHECK_THROWS_AS(generate_env(1, 1, 5.0, 4), ValidationError);
}

TEST_CASE("observe lists candidates clockwise with relative angles") {
  std::vector<EnvNode> nodes{{{0, 0}, 0}, {{0, 1}, 1}, {{1, 0}, 2}, {{-1, 0}, 3}, {{0, -1}, 4}};
  EnvGraph env("plus", nodes, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
  auto obs = observe(env, 0, 90.0);
  REQUIRE(obs.candidates.size() == 4);
  CHECK(obs.candidates[0].node == 2);
  CHECK(obs.candidates[0].direction == Direction::Front);
  CHECK(obs.candidates[1].node == 4);
  CHECK(obs.candidates[1].direction == Direction::Right);
  CHECK(obs.candidates[2].node == 3);
  CHECK(obs.candidates[2].direction == Direction::Rear);
  CHECK(obs.candidates[3].node == 1);
  CHECK(obs.candidates[3].angle == doctest::Approx(270.0));
  CHECK(obs.candidates[3].landmark == 1);
}
