#include <filesystem>

#include "doctest.h"
#include "navlab/io.hpp"
#include "navlab/run.hpp"

using namespace navlab;
namespace fs = std::filesystem;

namespace {

RunConfig tiny_run() {
  RunConfig c;
  c.world.nodes = 10;
  c.world.landmarks = 6;
  c.world.max_hops = 3;
  c.data.train_worlds = 2;
  c.data.train_episodes_per_world = 3;
  c.data.eval_worlds = 1;
  c.data.eval_episodes_per_world = 4;
  c.latent.d_v = 6;
  c.latent.d_q = 6;
  c.latent.d_lm = 8;
  c.latent.num_queries = 4;
  c.policy.hidden = 8;
  c.policy.ffn_hidden = 12;
  c.training.total_steps = 6;
  c.training.warmup_steps = 2;
  c.resolve();
  return c;
}

fs::path temp_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("navlab_ckpt_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<double> flat(const nn::ParameterList& params) {
  std::vector<double> out;
  for (const auto& p : params) out.insert(out.end(), p.tensor.values().begin(), p.tensor.values().end());
  return out;
}

}  // namespace

TEST_CASE("checkpoint bytes round-trip") {
  const RunConfig c = tiny_run();
  Agent agent(c);
  const auto bench = generate_benchmark(c);
  Trainer trainer(c, agent.policy, agent.provider, bench.train);
  trainer.step();
  const Checkpoint ck = capture(c, agent.parameters(), &trainer);
  const auto bytes = serialize(ck);
  const Checkpoint back = deserialize(bytes);
  CHECK(back.config_hash == config_hash(c));
  CHECK(back.step == 1);
  CHECK(back.adam_steps == 1);
  REQUIRE(back.tensors.size() == ck.tensors.size());
  CHECK(back.tensors[3].values == ck.tensors[3].values);
  CHECK(serialize(back) == bytes);

  Agent other(c);
  restore_parameters(back, other.parameters());
  CHECK(flat(other.parameters()) == flat(agent.parameters()));
}

TEST_CASE("truncated, corrupted and future checkpoints are rejected") {
  const RunConfig c = tiny_run();
  Agent agent(c);
  const auto bytes = serialize(capture(c, agent.parameters(), nullptr));
  for (std::size_t cut : {std::size_t{0}, std::size_t{5}, std::size_t{40}, bytes.size() / 2, bytes.size() - 1}) {
    CHECK_THROWS_AS(deserialize(std::span(bytes).first(cut)), CheckpointCorruptError);
  }
  auto flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x10;
  CHECK_THROWS_AS(deserialize(flipped), CheckpointCorruptError);
  auto future = bytes;
  future[8] = 99;
  CHECK_THROWS_AS(deserialize(future), CheckpointVersionError);
  CHECK_THROWS_AS(load_checkpoint("/nonexistent/x.ckpt"), IoError);
}

TEST_CASE("shape mismatches leave the model untouched") {
  RunConfig c = tiny_run();
  Agent agent(c);
  const Checkpoint ck = capture(c, agent.parameters(), nullptr);
  RunConfig wider = c;
  wider.policy.ffn_hidden = 14;
  Agent other(wider);
  const auto before = flat(other.parameters());
  CHECK_THROWS_AS(restore_parameters(ck, other.parameters()), CheckpointError);
  CHECK(flat(other.parameters()) == before);
}

TEST_CASE("resuming reproduces an uninterrupted run") {
  const RunConfig c = tiny_run();
  const auto bench = generate_benchmark(c);
  const auto dir = temp_dir("resume");

  Agent straight(c);
  TrainOptions full;
  full.output_dir = dir / "full";
  const auto a = train_run(c, bench.train, straight, full);

  Agent first(c);
  TrainOptions part;
  part.output_dir = dir / "split";
  part.stop_at = 3;
  const auto mid = train_run(c, bench.train, first, part);
  Agent second(c);
  TrainOptions rest;
  rest.output_dir = dir / "split";
  rest.resume = mid.checkpoint;
  const auto b = train_run(c, bench.train, second, rest);

  CHECK(flat(straight.parameters()) == flat(second.parameters()));
  CHECK(a.checkpoint_hash == b.checkpoint_hash);
  CHECK(io::read_text(dir / "full" / "train_log.csv") == io::read_text(dir / "split" / "train_log.csv"));

  RunConfig changed = c;
  changed.training.lambda = 0.5;
  Agent third(changed);
  CHECK_THROWS_AS(train_run(changed, bench.train, third, rest), CheckpointError);
  fs::remove_all(dir);
}

TEST_CASE("load_agent rebuilds the trained model") {
  const RunConfig c = tiny_run();
  const auto bench = generate_benchmark(c);
  const auto dir = temp_dir("load");
  Agent agent(c);
  TrainOptions opt;
  opt.output_dir = dir;
  const auto r = train_run(c, bench.train, agent, opt);
  const auto loaded = load_agent(r.checkpoint);
  CHECK(config_hash(loaded.config) == config_hash(c));
  CHECK(flat(loaded.agent->parameters()) == flat(agent.parameters()));
  CHECK(fs::exists(dir / "config.resolved.json"));
  fs::remove_all(dir);
}
