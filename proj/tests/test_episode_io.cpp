#include <filesystem>

#include "doctest.h"
#include "navlab/episode.hpp"
#include "navlab/error.hpp"
#include "navlab/io.hpp"

using namespace navlab;
namespace fs = std::filesystem;

namespace {

EnvGraph corner_world() {
  // 0 at origin, 1 north, 2 north-east of 1, 3 east of 0.
  std::vector<EnvNode> nodes{{{0, 0}, 5}, {{0, 4}, 2}, {{4, 4}, 7}, {{4, 0}, 1}};
  return EnvGraph("corner", nodes, {{0, 1}, {1, 2}, {0, 3}});
}

fs::path temp_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("navlab_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("instructions describe heading-relative turns") {
  const auto env = corner_world();
  const auto tokens = describe_path(env, {0, 1, 2});
  REQUIRE(tokens.size() == 4);
  CHECK(tokens[0] == direction_token(Direction::Front));
  CHECK(tokens[1] == landmark_token(2));
  CHECK(tokens[2] == direction_token(Direction::Right));
  CHECK(tokens[3] == landmark_token(7));
  CHECK(instruction_text(tokens) == "go front to landmark 2, then go right to landmark 7");
  CHECK(describe_path(env, {0}).empty());
}

TEST_CASE("episode validation") {
  const auto env = corner_world();
  Episode e{"e", "corner", describe_path(env, {0, 1, 2}), "", 0, 2, {0, 1, 2}};
  CHECK_NOTHROW(validate_episode(e, env, 8));
  e.gt_path = {0, 2};
  CHECK_THROWS_AS(validate_episode(e, env, 8), ValidationError);
  e.gt_path = {0, 1, 2};
  e.goal = 1;
  CHECK_THROWS_AS(validate_episode(e, env, 8), ValidationError);
  e.goal = 2;
  e.instruction_tokens.push_back(vocabulary_size(8));
  CHECK_THROWS_AS(validate_episode(e, env, 8), ValidationError);
}

TEST_CASE("generated episodes respect hop bounds and are shortest paths") {
  const auto env = generate_env(9, 30, 6.5, 12);
  const auto eps = generate_episodes(env, 4, 50, 2, 4);
  REQUIRE(eps.size() == 50);
  for (const auto& e : eps) {
    const int hops = static_cast<int>(e.gt_path.size()) - 1;
    CHECK(hops >= 2);
    CHECK(hops <= 4);
    CHECK(shortest_path(env, e.start, e.goal).path == e.gt_path);
    CHECK(e.instruction_tokens == describe_path(env, e.gt_path));
    CHECK_NOTHROW(validate_episode(e, env, 12));
  }
  CHECK(generate_episodes(env, 4, 50, 2, 4)[17].gt_path == eps[17].gt_path);
  CHECK_THROWS_AS(generate_episodes(env, 4, 5, 50, 60), GenerationExhaustedError);
  CHECK_THROWS_AS(generate_episodes(env, 4, 5, 3, 2), ValidationError);
}

TEST_CASE("world and episode files round-trip") {
  const auto dir = temp_dir("io");
  const auto env = generate_env(2, 15, 6.0, 5, "w2");
  io::save_env(dir / "w2.json", env);
  const auto back = io::load_env(dir / "w2.json");
  CHECK(back.id() == "w2");
  CHECK(back.edges() == env.edges());
  for (NodeId i = 0; i < 15; ++i) {
    CHECK(back.position(i).x == env.position(i).x);
    CHECK(back.landmark(i) == env.landmark(i));
  }
  const auto eps = generate_episodes(env, 1, 5, 1, 3);
  io::save_episodes(dir / "eps.jsonl", eps);
  const auto eps_back = io::load_episodes(dir / "eps.jsonl");
  REQUIRE(eps_back.size() == 5);
  CHECK(eps_back[3].gt_path == eps[3].gt_path);
  CHECK(eps_back[3].instruction_text == eps[3].instruction_text);
  CHECK(io::load_envs(dir.string()).size() == 1);
  fs::remove_all(dir);
}

TEST_CASE("world files: id fallback, string ids and malformed input") {
  auto doc = nlohmann::json::parse(
      R"({"nodes":[{"id":"0","x":0,"y":0,"landmark":1},{"id":1,"x":3,"y":4,"landmark":0}],"edges":[[0,1]]})");
  const auto env = io::env_from_json(doc, "fallback");
  CHECK(env.id() == "fallback");
  CHECK(*env.edge_length(0, 1) == doctest::Approx(5.0));
  doc["extra"] = 1;
  CHECK_THROWS_AS(io::env_from_json(doc, "x"), ValidationError);
  doc.erase("extra");
  doc["nodes"][1]["id"] = 0;
  CHECK_THROWS_AS(io::env_from_json(doc, "x"), ValidationError);
  CHECK_THROWS_AS(io::env_from_json(nlohmann::json::parse(R"({"nodes":[]})"), "x"), ValidationError);
  CHECK_THROWS_AS(io::load_env("/nonexistent/navlab.json"), IoError);
}

TEST_CASE("malformed episode lines name the line") {
  const auto dir = temp_dir("eps");
  io::write_text(dir / "bad.jsonl", "\n{\"id\": 1}\n");
  try {
    io::load_episodes(dir / "bad.jsonl");
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
  }
  fs::remove_all(dir);
}
