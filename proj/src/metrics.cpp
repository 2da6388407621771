#include "navlab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>

#include "navlab/error.hpp"
#include "navlab/io.hpp"
#include "navlab/kernels.hpp"

namespace navlab {

namespace {

void require_nonempty(std::span<const NodeId> traj) {
  if (traj.empty()) throw TrajectoryError("empty trajectory");
}

double round2(double v) { return std::round(v * 100.0) / 100.0; }

}  // namespace

double trajectory_length(const EnvGraph& env, std::span<const NodeId> traj) {
  require_nonempty(traj);
  double total = 0.0;
  for (std::size_t i = 1; i < traj.size(); ++i) {
    if (traj[i] == traj[i - 1]) continue;
    auto len = env.edge_length(traj[i - 1], traj[i]);
    if (!len) {
      throw TrajectoryError("trajectory hop " + std::to_string(traj[i - 1]) + " -> " +
                            std::to_string(traj[i]) + " is not an edge of " + env.id());
    }
    total += *len;
  }
  return total;
}

double navigation_error(const EnvGraph& env, std::span<const NodeId> traj, NodeId goal) {
  require_nonempty(traj);
  return env.geodesic(traj.back(), goal);
}

bool success(const EnvGraph& env, std::span<const NodeId> traj, NodeId goal, double threshold) {
  return navigation_error(env, traj, goal) < threshold;
}

bool oracle_success(const EnvGraph& env, std::span<const NodeId> traj, NodeId goal, double threshold) {
  require_nonempty(traj);
  return std::any_of(traj.begin(), traj.end(),
                     [&](NodeId n) { return env.geodesic(n, goal) < threshold; });
}

double spl(const EnvGraph& env, std::span<const NodeId> traj, const Episode& episode, double threshold) {
  if (!success(env, traj, episode.goal, threshold)) return 0.0;
  const double l = env.geodesic(episode.start, episode.goal);
  const double p = trajectory_length(env, traj);
  if (l <= 0.0) return 1.0;
  return l / std::max(p, l);
}

double dtw(const EnvGraph& env, std::span<const NodeId> a, std::span<const NodeId> b) {
  require_nonempty(a);
  require_nonempty(b);
  const std::size_t n = a.size(), m = b.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> d((n + 1) * (m + 1), inf);
  auto at = [&](std::size_t i, std::size_t j) -> double& { return d[i * (m + 1) + j]; };
  at(0, 0) = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const double best = std::min({at(i - 1, j), at(i, j - 1), at(i - 1, j - 1)});
      at(i, j) = env.geodesic(a[i - 1], b[j - 1]) + best;
    }
  }
  return at(n, m);
}

double ndtw(const EnvGraph& env, std::span<const NodeId> traj, std::span<const NodeId> gt,
            double threshold) {
  return std::exp(-dtw(env, traj, gt) / (static_cast<double>(gt.size()) * threshold));
}

EpisodeMetrics episode_metrics(const EnvGraph& env, const Episode& episode,
                               std::vector<NodeId> trajectory, double threshold) {
  EpisodeMetrics m;
  m.episode_id = episode.id;
  m.env_id = episode.env_id;
  m.trajectory = std::move(trajectory);
  m.tl = trajectory_length(env, m.trajectory);
  m.ne = navigation_error(env, m.trajectory, episode.goal);
  m.success = m.ne < threshold;
  m.oracle_success = oracle_success(env, m.trajectory, episode.goal, threshold);
  m.spl = spl(env, m.trajectory, episode, threshold);
  m.ndtw = ndtw(env, m.trajectory, episode.gt_path, threshold);
  m.sdtw = m.success ? m.ndtw : 0.0;
  return m;
}

MetricSummary summarize(std::span<const EpisodeMetrics> episodes) {
  if (episodes.empty()) throw EmptyInputError("no episodes to summarize");
  MetricSummary s;
  s.episodes = episodes.size();
  for (const auto& e : episodes) {
    s.tl += e.tl;
    s.ne += e.ne;
    s.osr += e.oracle_success ? 1.0 : 0.0;
    s.sr += e.success ? 1.0 : 0.0;
    s.spl += e.spl;
    s.ndtw += e.ndtw;
    s.sdtw += e.sdtw;
  }
  const double n = static_cast<double>(episodes.size());
  s.tl /= n;
  s.ne /= n;
  s.osr = round2(100.0 * s.osr / n);
  s.sr = round2(100.0 * s.sr / n);
  s.spl = round2(100.0 * s.spl / n);
  s.ndtw /= n;
  s.sdtw /= n;
  return s;
}

MetricReport evaluate(const PolicyModel& model, LatentCache& latents, const Dataset& data,
                      const EvalConfig& config, int threads) {
  if (data.episodes.empty()) throw EmptyInputError("evaluation set has no episodes");
  for (const auto& e : data.episodes) (void)data.env(e.env_id);

  const auto count = static_cast<std::ptrdiff_t>(data.episodes.size());
  std::vector<EpisodeMetrics> results(data.episodes.size());
  std::exception_ptr failure;
  const int team = threads > 0 ? threads : kernels::max_threads();

#pragma omp parallel for schedule(dynamic) num_threads(team)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      const Episode& ep = data.episodes[static_cast<std::size_t>(i)];
      const EnvGraph& env = data.env(ep.env_id);
      Rollout r = rollout(ep, env, model, latents, SelectMode::Greedy, config.max_steps);
      auto m = episode_metrics(env, ep, std::move(r.trajectory), config.success_threshold);
      m.stopped = r.stopped;
      results[static_cast<std::size_t>(i)] = std::move(m);
    } catch (...) {
#pragma omp critical(navlab_eval_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  MetricReport report;
  report.summary = summarize(results);
  report.episodes = std::move(results);
  return report;
}

nlohmann::json report_to_json(const MetricReport& report) {
  using nlohmann::json;
  const auto& s = report.summary;
  json summary = {{"episodes", s.episodes}, {"TL", s.tl},   {"NE", s.ne},     {"OSR", s.osr},
                  {"SR", s.sr},             {"SPL", s.spl}, {"nDTW", s.ndtw}, {"sDTW", s.sdtw}};
  json rows = json::array();
  for (const auto& e : report.episodes) {
    rows.push_back({{"id", e.episode_id},
                    {"env_id", e.env_id},
                    {"trajectory", e.trajectory},
                    {"stopped", e.stopped},
                    {"TL", e.tl},
                    {"NE", e.ne},
                    {"success", e.success},
                    {"oracle_success", e.oracle_success},
                    {"SPL", e.spl},
                    {"nDTW", e.ndtw},
                    {"sDTW", e.sdtw}});
  }
  return {{"summary", summary}, {"episodes", rows}};
}

std::string summary_csv_row(const MetricSummary& s) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%.2f,%.2f,%.2f,%.2f,%.2f,%.4f,%.4f", s.tl, s.ne, s.osr, s.sr, s.spl,
                s.ndtw, s.sdtw);
  return buf;
}

std::string report_csv(const MetricReport& report) {
  return std::string(kReportCsvHeader) + "\n" + summary_csv_row(report.summary) + "\n";
}

void save_report(const std::filesystem::path& stem, const MetricReport& report) {
  auto json_path = stem;
  json_path += ".json";
  auto csv_path = stem;
  csv_path += ".csv";
  io::write_text(json_path, report_to_json(report).dump(2) + "\n");
  io::write_text(csv_path, report_csv(report));
}

}  // namespace navlab
