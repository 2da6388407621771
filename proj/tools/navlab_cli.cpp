// navlab command-line front end.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "navlab/checkpoint.hpp"
#include "navlab/config.hpp"
#include "navlab/error.hpp"
#include "navlab/gradsuite.hpp"
#include "navlab/io.hpp"
#include "navlab/metrics.hpp"
#include "navlab/prompt.hpp"
#include "navlab/run.hpp"

namespace fs = std::filesystem;
using namespace navlab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitValidation = 4;

struct UsageError : Error {
  using Error::Error;
};

int gen_env(std::uint64_t seed, int nodes, double radius, int landmarks, const std::string& id,
            const fs::path& out) {
  if (nodes < 2) throw UsageError("--nodes must be at least 2");
  if (!(radius > 0.0)) throw UsageError("--radius must be positive");
  if (landmarks < 1) throw UsageError("--landmarks must be at least 1");
  const EnvGraph env = generate_env(seed, nodes, radius, landmarks, id);
  io::save_env(out, env);
  std::cout << "nodes " << env.node_count() << " edges " << env.edges().size() << "\n";
  return kExitOk;
}

int gen_episodes(const fs::path& env_path, std::uint64_t seed, int count, int min_hops, int max_hops,
                 const fs::path& out) {
  if (count < 1) throw UsageError("--count must be at least 1");
  const EnvGraph env = io::load_env(env_path);
  const auto episodes = generate_episodes(env, seed, count, min_hops, max_hops);
  io::save_episodes(out, episodes);
  std::cout << "episodes " << episodes.size() << "\n";
  return kExitOk;
}

int train(const fs::path& config_path, const std::string& out_override,
          const std::string& resume, int steps) {
  RunConfig config = load_config(config_path);
  if (!out_override.empty()) config.output_dir = out_override;
  const Benchmark data = load_or_generate(config);
  Agent agent(config);
  TrainOptions options;
  options.output_dir = config.output_dir;
  if (!resume.empty()) options.resume = resume;
  if (steps >= 0) options.stop_at = steps;
  options.eval_data = &data.eval;
  options.log = [](const std::string& line) { std::cout << line << "\n" << std::flush; };
  std::cout << "resolved config " << config_to_json(config).dump() << "\n";
  const TrainResult result = train_run(config, data.train, agent, options);

  LatentCache cache(agent.provider);
  const auto report = evaluate(agent.policy, cache, data.eval, config.evaluation, config.evaluation.threads);
  save_report(fs::path(config.output_dir) / "eval_report", report);
  std::cout << kReportCsvHeader << "\n" << summary_csv_row(report.summary) << "\n";
  (void)result;
  return kExitOk;
}

int eval(const fs::path& ckpt, const std::string& envs, const fs::path& episodes_path,
         const fs::path& report_stem, int threads) {
  LoadedAgent loaded = load_agent(ckpt);
  Dataset data;
  for (auto& env : io::load_envs(envs)) data.add_env(std::move(env));
  data.episodes = io::load_episodes(episodes_path);
  for (const auto& e : data.episodes) {
    validate_episode(e, data.env(e.env_id), loaded.config.world.landmarks);
  }
  LatentCache cache(loaded.agent->provider);
  const auto report = evaluate(loaded.agent->policy, cache, data, loaded.config.evaluation,
                               threads > 0 ? threads : loaded.config.evaluation.threads);
  if (!report_stem.empty()) save_report(report_stem, report);
  std::cout << kReportCsvHeader << "\n" << summary_csv_row(report.summary) << "\n";
  return kExitOk;
}

std::vector<double> parse_angles(const std::string& arg) {
  std::string text = arg;
  if (fs::exists(arg)) text = io::read_text(arg);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& ex) {
    throw UsageError(std::string("--candidates-json: ") + ex.what());
  }
  if (!doc.is_array() || doc.empty()) throw UsageError("--candidates-json must be a non-empty array");
  std::vector<double> angles;
  for (const auto& c : doc) {
    if (c.is_number()) angles.push_back(c.get<double>());
    else if (c.is_object() && c.contains("angle") && c["angle"].is_number()) angles.push_back(c["angle"].get<double>());
    else throw UsageError("--candidates-json entries must be numbers or {\"angle\": ...}");
  }
  return angles;
}

int render_prompt(const std::string& instruction, const std::string& candidates, bool gpt4v,
                  int num_tokens) {
  if (gpt4v) {
    std::cout << render_gpt4v_prompt(instruction);
  } else {
    if (candidates.empty()) throw UsageError("--candidates-json is required without --gpt4v");
    const auto angles = parse_angles(candidates);
    std::cout << render_nav_prompt(instruction, angles, num_tokens);
  }
  return kExitOk;
}

int gradcheck(int scale, std::uint64_t seed, double tolerance) {
  if (scale < 1) throw UsageError("--scale must be at least 1");
  const auto entries = run_grad_suite(seed, scale);
  double worst = 0.0;
  for (const auto& e : entries) {
    char line[256];
    std::snprintf(line, sizeof line, "%-22s trials %4d coords %7zu max_rel_err %.3e", e.name.c_str(),
                  e.trials, e.coordinates, e.max_rel_error);
    std::cout << line << "\n";
    worst = std::max(worst, e.max_rel_error);
  }
  std::cout << (worst < tolerance ? "PASS" : "FAIL") << " max_rel_err " << worst << " tolerance "
            << tolerance << "\n";
  return worst < tolerance ? kExitOk : kExitValidation;
}

int sample_reasoning(const fs::path& episodes_path, std::uint64_t seed, int k, const fs::path& out) {
  if (k < 1) throw UsageError("--k must be at least 1");
  const auto episodes = io::load_episodes(episodes_path);
  const auto records = sample_reasoning_steps(episodes, seed, static_cast<std::size_t>(k));
  std::string text;
  for (const auto& r : records) {
    text += nlohmann::json{{"episode_id", r.episode_id},
                           {"step", r.step},
                           {"prompt", r.prompt},
                           {"image_ref", r.image_ref},
                           {"reasoning", r.reasoning}}
                .dump() +
            "\n";
  }
  if (out.empty()) std::cout << text;
  else io::write_text(out, text);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"navlab: graph-memory navigation agent toolkit"};
  app.require_subcommand(1);
  int code = kExitOk;

  std::uint64_t seed = 0;
  int nodes = 30, landmarks = 12, count = 0, min_hops = 2, max_hops = 4, steps = -1, k = 1;
  int threads = 0, scale = 1, num_tokens = 32;
  double radius = 6.5, tolerance = 1e-4;
  std::string out, env_path, id, config, resume, ckpt, envs, episodes, report, instruction,
      candidates;
  bool gpt4v = false;

  auto* c_env = app.add_subcommand("gen-env", "Generate a random world graph");
  c_env->add_option("--seed", seed, "World seed")->required();
  c_env->add_option("--nodes", nodes, "Node count");
  c_env->add_option("--radius", radius, "Connection radius in meters");
  c_env->add_option("--landmarks", landmarks, "Landmark vocabulary size");
  c_env->add_option("--id", id, "World id (default env_<seed>)");
  c_env->add_option("--out", out, "Output JSON path")->required();

  auto* c_eps = app.add_subcommand("gen-episodes", "Sample episodes on a world");
  c_eps->add_option("--env", env_path, "World JSON")->required();
  c_eps->add_option("--seed", seed, "Sampling seed")->required();
  c_eps->add_option("--count", count, "Episode count")->required();
  c_eps->add_option("--min-hops", min_hops, "Minimum shortest-path hops");
  c_eps->add_option("--max-hops", max_hops, "Maximum shortest-path hops");
  c_eps->add_option("--out", out, "Output JSONL path")->required();

  auto* c_train = app.add_subcommand("train", "Train a policy from a run config");
  c_train->add_option("--config", config, "Run config JSON")->required();
  c_train->add_option("--out", out, "Override output_dir");
  c_train->add_option("--resume", resume, "Checkpoint to resume from");
  c_train->add_option("--steps", steps, "Stop after this many total steps");

  auto* c_eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  c_eval->add_option("--ckpt", ckpt, "Checkpoint path")->required();
  c_eval->add_option("--envs", envs, "World JSON directory or comma-separated files")->required();
  c_eval->add_option("--episodes", episodes, "Episodes JSONL")->required();
  c_eval->add_option("--report", report, "Report path stem (.json and .csv are written)");
  c_eval->add_option("--threads", threads, "Worker threads (default NAVLAB_THREADS or all)");

  auto* c_prompt = app.add_subcommand("render-prompt", "Print a rendered prompt");
  c_prompt->add_option("--instruction", instruction, "Instruction text")->required();
  c_prompt->add_option("--candidates-json", candidates, "JSON array of angles, inline or file");
  c_prompt->add_flag("--gpt4v", gpt4v, "Render the reasoning-request prompt");
  c_prompt->add_option("--num-tokens", num_tokens, "Image tokens per candidate");

  auto* c_grad = app.add_subcommand("gradcheck", "Finite-difference gradient suite");
  c_grad->add_option("--scale", scale, "Random trials per primitive");
  c_grad->add_option("--seed", seed, "Suite seed");
  c_grad->add_option("--tolerance", tolerance, "Maximum relative error");

  auto* c_reason = app.add_subcommand("sample-reasoning", "Sample steps for reasoning data");
  c_reason->add_option("--episodes", episodes, "Episodes JSONL")->required();
  c_reason->add_option("--seed", seed, "Sampling seed")->required();
  c_reason->add_option("--k", k, "Number of steps");
  c_reason->add_option("--out", out, "Output JSONL (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*c_env) code = gen_env(seed, nodes, radius, landmarks, id, out);
    else if (*c_eps) code = gen_episodes(env_path, seed, count, min_hops, max_hops, out);
    else if (*c_train) code = train(config, out, resume, steps);
    else if (*c_eval) code = eval(ckpt, envs, episodes, report, threads);
    else if (*c_prompt) code = render_prompt(instruction, candidates, gpt4v, num_tokens);
    else if (*c_grad) code = gradcheck(scale, seed, tolerance);
    else if (*c_reason) code = sample_reasoning(episodes, seed, k, out);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed JSON: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  }
  return code;
}
