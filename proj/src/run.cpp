#include "navlab/run.hpp"

#include <cstdio>
#include <iomanip>
#include <sstream>

#include "navlab/io.hpp"
#include "navlab/rng.hpp"

namespace navlab {

Agent::Agent(const RunConfig& config)
    : provider(config.latent, stream_seed(config.seed, "init-latent")),
      policy(config.policy, stream_seed(config.seed, "init-policy")) {}

namespace {

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

std::string csv_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

TrainResult train_run(const RunConfig& config, const Dataset& train, Agent& agent,
                      const TrainOptions& options) {
  auto log = [&](const std::string& line) {
    if (options.log) options.log(line);
  };
  const auto& dir = options.output_dir;
  std::filesystem::create_directories(dir);
  io::write_text(dir / "config.resolved.json", config_to_json(config).dump(2) + "\n");
  log("config hash " + hex64(config_hash(config)));

  Trainer trainer(config, agent.policy, agent.provider, train);
  const auto params = agent.parameters();
  std::string csv = "step,lr,loss_bc,loss_dag,eval_SR,eval_SPL\n";
  if (options.resume) {
    const Checkpoint ckpt = load_checkpoint(*options.resume);
    if (ckpt.config_hash != config_hash(config)) {
      throw CheckpointError("checkpoint " + options.resume->string() + " was written by a different config");
    }
    restore_parameters(ckpt, params);
    restore_trainer(ckpt, trainer);
    if (std::filesystem::exists(dir / "train_log.csv")) csv = io::read_text(dir / "train_log.csv");
    log("resumed at step " + std::to_string(trainer.current_step()));
  }

  const int stop = options.stop_at.value_or(config.training.total_steps);
  const auto& tc = config.training;
  TrainResult result;
  auto checkpoint_to = [&](const std::filesystem::path& path) {
    save_checkpoint(path, capture(config, params, &trainer));
    result.checkpoint = path;
    result.checkpoint_hash = file_hash(path);
  };

  while (trainer.current_step() < stop) {
    const StepStats s = trainer.step();
    result.last = s;
    const int done = trainer.current_step();
    std::string sr, spl;
    if (options.eval_data && tc.eval_every > 0 && done % tc.eval_every == 0) {
      LatentCache cache(agent.provider);
      const auto report = evaluate(agent.policy, cache, *options.eval_data, config.evaluation,
                                   config.evaluation.threads);
      sr = csv_number(report.summary.sr);
      spl = csv_number(report.summary.spl);
      log("step " + std::to_string(done) + " eval SR " + sr + " SPL " + spl);
    }
    csv += std::to_string(s.step) + "," + csv_number(s.lr) + "," + csv_number(s.loss_bc) + "," +
           csv_number(s.loss_dag) + "," + sr + "," + spl + "\n";
    if (tc.checkpoint_every > 0 && done % tc.checkpoint_every == 0 && done < stop) {
      checkpoint_to(dir / ("step_" + std::to_string(done) + ".ckpt"));
    }
  }
  io::write_text(dir / "train_log.csv", csv);
  checkpoint_to(dir / "final.ckpt");
  log("checkpoint " + result.checkpoint.string() + " hash " + result.checkpoint_hash);
  return result;
}

LoadedAgent load_agent(const std::filesystem::path& checkpoint) {
  const Checkpoint ckpt = load_checkpoint(checkpoint);
  LoadedAgent out;
  try {
    out.config = config_from_json(nlohmann::json::parse(ckpt.config_json));
  } catch (const nlohmann::json::exception& ex) {
    throw CheckpointCorruptError(std::string("embedded config unreadable: ") + ex.what());
  }
  if (config_hash(out.config) != ckpt.config_hash) {
    throw CheckpointCorruptError("embedded config does not match its hash");
  }
  out.agent = std::make_unique<Agent>(out.config);
  restore_parameters(ckpt, out.agent->parameters());
  return out;
}

}  // namespace navlab
