#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "navlab/config.hpp"
#include "navlab/episode.hpp"
#include "navlab/graph.hpp"
#include "navlab/latent.hpp"
#include "navlab/policy.hpp"

namespace navlab {

inline constexpr double kSuccessThreshold = 3.0;

/// Sum of traversed edge lengths; every consecutive pair must be an edge.
double trajectory_length(const EnvGraph& env, std::span<const NodeId> traj);
double navigation_error(const EnvGraph& env, std::span<const NodeId> traj, NodeId goal);
/// NE strictly below the threshold.
bool success(const EnvGraph& env, std::span<const NodeId> traj, NodeId goal,
             double threshold = kSuccessThreshold);
bool oracle_success(const EnvGraph& env, std::span<const NodeId> traj, NodeId goal,
                    double threshold = kSuccessThreshold);
double spl(const EnvGraph& env, std::span<const NodeId> traj, const Episode& episode,
           double threshold = kSuccessThreshold);
/// Dynamic time warping between node sequences with geodesic point cost.
double dtw(const EnvGraph& env, std::span<const NodeId> a, std::span<const NodeId> b);
double ndtw(const EnvGraph& env, std::span<const NodeId> traj, std::span<const NodeId> gt,
            double threshold = kSuccessThreshold);

struct EpisodeMetrics {
  std::string episode_id;
  std::string env_id;
  std::vector<NodeId> trajectory;
  bool stopped = false;
  double tl = 0.0;
  double ne = 0.0;
  bool success = false;
  bool oracle_success = false;
  double spl = 0.0;
  double ndtw = 0.0;
  double sdtw = 0.0;
};

EpisodeMetrics episode_metrics(const EnvGraph& env, const Episode& episode,
                               std::vector<NodeId> trajectory, double threshold = kSuccessThreshold);

/// Dataset means. OSR, SR and SPL are percentages rounded to 2 decimals.
struct MetricSummary {
  std::size_t episodes = 0;
  double tl = 0.0;
  double ne = 0.0;
  double osr = 0.0;
  double sr = 0.0;
  double spl = 0.0;
  double ndtw = 0.0;
  double sdtw = 0.0;
};

struct MetricReport {
  std::vector<EpisodeMetrics> episodes;
  MetricSummary summary;
};

MetricSummary summarize(std::span<const EpisodeMetrics> episodes);

/// Greedy rollouts of every episode, in parallel over episodes. `threads` <= 0
/// uses max_threads(); results do not depend on the thread count.
MetricReport evaluate(const PolicyModel& model, LatentCache& latents, const Dataset& data,
                      const EvalConfig& config, int threads = 0);

nlohmann::json report_to_json(const MetricReport& report);
inline constexpr const char* kReportCsvHeader = "TL,NE,OSR,SR,SPL,nDTW,sDTW";
std::string summary_csv_row(const MetricSummary& s);
std::string report_csv(const MetricReport& report);
/// Writes <stem>.json and <stem>.csv.
void save_report(const std::filesystem::path& stem, const MetricReport& report);

}  // namespace navlab
