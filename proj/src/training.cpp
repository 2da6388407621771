#include "navlab/training.hpp"

#include <cstdlib>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "navlab/error.hpp"
#include "navlab/io.hpp"

namespace navlab {

LossConfig loss_config(const RunConfig& config) {
  LossConfig c;
  c.lambda = config.training.lambda;
  c.dagger_enabled = config.training.dagger;
  c.temperature = config.training.temperature;
  c.rule = config.training.pseudo_label;
  c.stop_radius = config.training.stop_radius < 0.0 ? config.evaluation.success_threshold
                                                   : config.training.stop_radius;
  c.max_steps = config.evaluation.max_steps;
  return c;
}

NodeId pseudo_label(const GraphMemory& mem, const EnvGraph& env, NodeId goal,
                    double stop_radius, PseudoLabelRule rule) {
  if (mem.empty()) throw EmptyInputError("pseudo_label: memory is empty");
  if (mem.current() == goal || env.geodesic(mem.current(), goal) < stop_radius) return kStopNode;
  const auto travelled = distances_from(mem.graph(env), mem.current());
  NodeId best = kStopNode;
  double best_cost = std::numeric_limits<double>::infinity();
  for (NodeId v : mem.unexplored()) {
    double cost = env.geodesic(v, goal);
    if (rule == PseudoLabelRule::MemoryPlusRemaining) cost += travelled[v];
    if (best == kStopNode || cost < best_cost - 1e-9 * std::max(1.0, best_cost)) {
      best_cost = cost;
      best = v;
    }
  }
  return best;
}

Tensor bc_loss(const Episode& episode, const EnvGraph& env, const PolicyModel& model,
               LatentCache& latents) {
  const auto& path = episode.gt_path;
  std::vector<Tensor> terms;
  Chooser teacher = [&](int step, const GraphMemory& mem, const ActionScores& scores) {
    const auto t = static_cast<std::size_t>(step);
    const NodeId label = t + 1 < path.size() ? path[t + 1] : kStopNode;
    if (!mem.contains(label)) {
      throw LabelError("episode " + episode.id + ": gt node " + std::to_string(label) +
                       " missing from memory");
    }
    terms.push_back(ops::cross_entropy(scores.logits, scores.mask, scores.index_of(label)));
    return label;
  };
  drive(episode, env, model, latents, static_cast<int>(path.size()), teacher);
  return ops::sum(ops::concat_rows(terms));
}

Tensor dagger_loss(const Episode& episode, const EnvGraph& env, const PolicyModel& model,
                   LatentCache& latents, std::uint64_t seed, const LossConfig& config) {
  Rng rng(seed);
  std::vector<Tensor> terms;
  Chooser learner = [&](int, const GraphMemory& mem, const ActionScores& scores) {
    const NodeId label =
        pseudo_label(mem, env, episode.goal, config.stop_radius, config.rule);
    terms.push_back(ops::cross_entropy(scores.logits, scores.mask, scores.index_of(label)));
    return sample_action(scores, rng, config.temperature);
  };
  drive(episode, env, model, latents, config.max_steps, learner);
  if (terms.empty()) return Tensor::scalar(0.0);
  return ops::sum(ops::concat_rows(terms));
}

double combine_losses(double lambda, double bc, double dag) { return lambda * bc + dag; }

double LrSchedule::at(int step) const {
  if (warmup > 0 && step < warmup) {
    return floor + (peak - floor) * static_cast<double>(step) / static_cast<double>(warmup);
  }
  if (total <= warmup) return peak;
  const double progress =
      std::clamp(static_cast<double>(step - warmup) / static_cast<double>(total - warmup), 0.0, 1.0);
  return 0.5 * peak * (1.0 + std::cos(std::numbers::pi * progress));
}

AdamW::AdamW(nn::ParameterList params, double beta1, double beta2, double eps, double weight_decay)
    : params_(std::move(params)), beta1_(beta1), beta2_(beta2), eps_(eps), weight_decay_(weight_decay) {
  for (const auto& p : params_) {
    m_.emplace_back(p.tensor.size(), 0.0);
    v_.emplace_back(p.tensor.size(), 0.0);
  }
}

void AdamW::step(double lr) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Tensor t = params_[i].tensor;
    if (!t.has_grad()) continue;
    auto w = t.mutable_values();
    auto g = t.grad();
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < w.size(); ++j) {
      m[j] = beta1_ * m[j] + (1.0 - beta1_) * g[j];
      v[j] = beta2_ * v[j] + (1.0 - beta2_) * g[j] * g[j];
      w[j] -= lr * weight_decay_ * w[j];
      w[j] -= lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + eps_);
    }
  }
}

nn::ParameterList model_parameters(const PolicyModel& model, const LatentProvider& provider) {
  auto params = model.parameters();
  for (auto& p : provider.parameters()) params.push_back(std::move(p));
  return params;
}

namespace {

Dataset generate_split(const RunConfig& c, std::string_view split, int worlds, int per_world) {
  Dataset d;
  for (int w = 0; w < worlds; ++w) {
    std::ostringstream id;
    id << split << "_" << (w < 10 ? "0" : "") << w;
    EnvGraph env = generate_env(stream_seed(c.seed, std::string("env-gen-") + std::string(split), w),
                                c.world.nodes, c.world.radius, c.world.landmarks, id.str());
    auto eps = generate_episodes(env, stream_seed(c.seed, std::string("episode-gen-") + std::string(split), w),
                                 per_world, c.world.min_hops, c.world.max_hops);
    d.episodes.insert(d.episodes.end(), eps.begin(), eps.end());
    d.add_env(std::move(env));
  }
  return d;
}

Dataset load_split(const std::string& envs, const std::string& episodes, int landmarks) {
  Dataset d;
  for (auto& env : io::load_envs(envs)) d.add_env(std::move(env));
  d.episodes = io::load_episodes(episodes);
  for (const auto& e : d.episodes) validate_episode(e, d.env(e.env_id), landmarks);
  return d;
}

}  // namespace

Benchmark generate_benchmark(const RunConfig& c) {
  return Benchmark{generate_split(c, "train", c.data.train_worlds, c.data.train_episodes_per_world),
                   generate_split(c, "eval", c.data.eval_worlds, c.data.eval_episodes_per_world)};
}

Benchmark load_or_generate(const RunConfig& c) {
  Benchmark b;
  if (!c.data.train_envs.empty() && !c.data.train_episodes.empty()) {
    b.train = load_split(c.data.train_envs, c.data.train_episodes, c.world.landmarks);
  } else {
    b.train = generate_split(c, "train", c.data.train_worlds, c.data.train_episodes_per_world);
  }
  if (!c.data.eval_envs.empty() && !c.data.eval_episodes.empty()) {
    b.eval = load_split(c.data.eval_envs, c.data.eval_episodes, c.world.landmarks);
  } else {
    b.eval = generate_split(c, "eval", c.data.eval_worlds, c.data.eval_episodes_per_world);
  }
  return b;
}

Trainer::Trainer(RunConfig config, PolicyModel& model, LatentProvider& provider, const Dataset& train)
    : config_(std::move(config)),
      model_(model),
      provider_(provider),
      train_(train),
      params_(model_parameters(model, provider)),
      optimizer_([&] {
        nn::ParameterList trainable;
        for (const auto& p : params_) {
          if (p.tensor.requires_grad()) trainable.push_back(p);
        }
        return trainable;
      }(), config_.training.beta1, config_.training.beta2, config_.training.adam_eps,
                 config_.training.weight_decay),
      schedule_{config_.training.lr_floor, config_.training.lr_peak, config_.training.warmup_steps,
                config_.training.total_steps},
      cache_(provider) {
  if (train_.episodes.empty()) throw EmptyInputError("training set has no episodes");
}

std::size_t Trainer::episode_for(std::uint64_t slot) const {
  const std::uint64_t n = train_.episodes.size();
  const std::uint64_t epoch = slot / n;
  if (epoch != cached_epoch_) {
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    Rng rng = make_stream(config_.seed, "shuffle", epoch);
    std::shuffle(order_.begin(), order_.end(), rng);
    cached_epoch_ = epoch;
  }
  return order_[slot % n];
}

StepStats Trainer::step() {
  const auto& tc = config_.training;
  const LossConfig lc = loss_config(config_);
  const int batch = tc.batch_size;
  bool do_bc = true, do_dag = tc.dagger && step_ >= tc.dagger_start;
  if (tc.alternate && do_dag) {
    do_bc = step_ % 2 == 0;
    do_dag = !do_bc;
  }

  StepStats stats;
  stats.step = step_;
  stats.lr = schedule_.at(step_);
  nn::zero_grad(params_);
  Tape tape;
  std::vector<Tensor> totals;
  {
    TapeScope scope(tape);
    for (int j = 0; j < batch; ++j) {
      const std::uint64_t slot = static_cast<std::uint64_t>(step_) * batch + j;
      const Episode& ep = train_.episodes[episode_for(slot)];
      const EnvGraph& env = train_.env(ep.env_id);
      Tensor total = Tensor::scalar(0.0);
      if (do_bc) {
        Tensor bc = bc_loss(ep, env, model_, cache_);
        stats.loss_bc += bc.item() / batch;
        total = ops::scale(bc, lc.lambda);
      }
      if (do_dag) {
        Tensor dag = dagger_loss(ep, env, model_, cache_, stream_seed(config_.seed, "dagger", slot), lc);
        stats.loss_dag += dag.item() / batch;
        total = do_bc ? ops::add(total, dag) : dag;
      }
      if (!std::isfinite(total.item())) {
        std::ostringstream os;
        os << "non-finite loss at step " << step_ << " on episode " << ep.id << " (env " << ep.env_id
           << ", start " << ep.start << ", goal " << ep.goal << ")";
        throw TrainingError(os.str());
      }
      totals.push_back(total);
    }
    Tensor loss = ops::scale(ops::sum(ops::concat_rows(totals)), 1.0 / batch);
    stats.total = loss.item();
    if (loss.requires_grad()) tape.backward(loss);
  }
  optimizer_.step(stats.lr);
  ++step_;
  return stats;
}

}  // namespace navlab
