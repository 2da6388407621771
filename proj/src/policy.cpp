#include "navlab/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "json.hpp"
#include "navlab/error.hpp"

namespace navlab {

namespace {

std::size_t sz(int v) { return static_cast<std::size_t>(v); }

constexpr double kDistanceScale = 0.1;

GasaLayer make_gasa(const PolicyConfig& c, Rng& rng) {
  GasaLayer g;
  g.layer = nn::EncoderLayer(sz(c.hidden), sz(c.ffn_hidden), sz(c.heads), rng);
  g.w = Tensor::parameter({1}, {c.affinity_w_init});
  g.b = Tensor::parameter({1}, {0.0});
  return g;
}

void collect_gasa(const GasaLayer& g, const std::string& prefix, nn::ParameterList& out) {
  g.layer.collect(prefix, out);
  out.push_back({prefix + ".affinity_w", g.w});
  out.push_back({prefix + ".affinity_b", g.b});
}

}  // namespace

PolicyModel::PolicyModel(const PolicyConfig& config, std::uint64_t seed) : config_(config) {
  if (config.hidden < 1 || config.ffn_hidden < 1 || config.heads < 1 || config.latent_dim < 1) {
    throw ConfigError("policy dimensions must be positive");
  }
  if (config.step_table_size < 2) throw ConfigError("policy step table needs at least two rows");
  if (config.node_encoder_depth < 0 || config.cross_modal_depth < 0 || config.gasa_layers < 0) {
    throw ConfigError("policy depths must be non-negative");
  }
  Rng rng(seed);
  const std::size_t d = sz(config.hidden);
  if (config.latent_dim != config.hidden) latent_projection.emplace(sz(config.latent_dim), d, rng);
  direction_mlp = nn::FeedForward(kDirectionFeatures, d, d, rng);
  const double emb = 1.0 / std::sqrt(static_cast<double>(d));
  step_table = nn::uniform_parameter(rng, {sz(config.step_table_size), d}, emb);
  stop_embedding = nn::uniform_parameter(rng, {1, d}, emb);
  for (int i = 0; i < config.node_encoder_depth; ++i) {
    node_encoder.emplace_back(d, sz(config.ffn_hidden), sz(config.heads), rng);
  }
  for (int i = 0; i < config.cross_modal_depth; ++i) {
    CrossModalLayer layer;
    layer.cross = nn::Attention(d, sz(config.latent_dim), d, d, sz(config.heads), rng);
    layer.norm = nn::LayerNorm(d);
    layer.gasa = make_gasa(config, rng);
    cross_layers.push_back(std::move(layer));
  }
  for (int i = 0; i < config.gasa_layers; ++i) gasa_stack.push_back(make_gasa(config, rng));
  score_head = nn::FeedForward(d, d, 1, rng);
}

nn::ParameterList PolicyModel::parameters() const {
  nn::ParameterList out;
  if (latent_projection) latent_projection->collect("policy.latent_projection", out);
  direction_mlp.collect("policy.direction_mlp", out);
  out.push_back({"policy.step_table", step_table});
  out.push_back({"policy.stop_embedding", stop_embedding});
  for (std::size_t i = 0; i < node_encoder.size(); ++i) {
    node_encoder[i].collect("policy.node_encoder." + std::to_string(i), out);
  }
  for (std::size_t i = 0; i < cross_layers.size(); ++i) {
    const auto p = "policy.cross." + std::to_string(i);
    cross_layers[i].cross.collect(p + ".attn", out);
    cross_layers[i].norm.collect(p + ".norm", out);
    collect_gasa(cross_layers[i].gasa, p + ".gasa", out);
  }
  for (std::size_t i = 0; i < gasa_stack.size(); ++i) {
    collect_gasa(gasa_stack[i], "policy.gasa." + std::to_string(i), out);
  }
  score_head.collect("policy.score_head", out);
  return out;
}

Tensor affinity_distances(const GraphMemory& mem) {
  const auto ids = mem.ordered_nodes();
  const std::size_t n = ids.size();
  std::vector<Vec2> pos;
  pos.reserve(n);
  for (NodeId id : ids) pos.push_back(id == kStopNode ? mem.current_position() : mem.node(id).position);
  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) d[i * n + j] = d[j * n + i] = euclidean(pos[i], pos[j]);
  return Tensor({n, n}, std::move(d));
}

Tensor node_inputs(const GraphMemory& mem, const PolicyModel& model) {
  if (mem.empty()) throw EmptyInputError("encode_nodes: memory is empty");
  const auto ids = mem.ordered_nodes();
  const std::size_t m = ids.size() - 1;  // real nodes
  const Vec2 here = mem.current_position();
  const double heading = mem.heading() * std::numbers::pi / 180.0;
  const std::size_t last_step = sz(model.config().step_table_size - 1);

  std::vector<Tensor> pooled;
  pooled.reserve(m);
  std::vector<double> features(m * kDirectionFeatures);
  std::vector<std::size_t> steps(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto& rec = mem.node(ids[i]);
    pooled.push_back(ops::mean_rows(ops::concat_rows(rec.views)));
    const double dist = euclidean(here, rec.position);
    double* f = &features[i * kDirectionFeatures];
    if (dist > 0.0) {
      const double b =
          wrap_degrees(bearing_degrees(here, rec.position) - mem.heading()) * std::numbers::pi / 180.0;
      f[0] = std::sin(b);
      f[1] = std::cos(b);
    }
    f[2] = dist * kDistanceScale;
    f[3] = std::sin(heading);
    f[4] = std::cos(heading);
    steps[i] = rec.status == NodeStatus::Visited
                   ? std::min(static_cast<std::size_t>(rec.visit_order), last_step)
                   : 0;
  }
  Tensor latents = ops::concat_rows(pooled);
  if (model.latent_projection) latents = (*model.latent_projection)(latents);
  Tensor directional = model.direction_mlp(Tensor({m, sz(kDirectionFeatures)}, std::move(features)));
  Tensor step = ops::gather_rows(model.step_table, steps);
  Tensor nodes = ops::add(ops::add(latents, directional), step);
  const Tensor parts[] = {nodes, model.stop_embedding};
  return ops::concat_rows(parts);
}

Tensor encode_nodes(const GraphMemory& mem, const PolicyModel& model) {
  Tensor x = node_inputs(mem, model);
  for (const auto& layer : model.node_encoder) x = layer(x);
  return x;
}

Tensor gasa_layer(const Tensor& x, const Tensor& distances, const GasaLayer& layer) {
  if (distances.rank() != 2 || distances.rows() != x.rows() || distances.cols() != x.rows()) {
    throw DimensionError("gasa_layer: affinity " + shape_string(distances.shape()) +
                         " does not match " + std::to_string(x.rows()) + " nodes");
  }
  return layer.layer(x, ops::scalar_affine(distances, layer.w, layer.b));
}

Tensor cross_modal_encode(const Tensor& nodes, const Tensor& instruction, const Tensor& distances,
                          const PolicyModel& model) {
  Tensor x = nodes;
  for (const auto& layer : model.cross_layers) {
    x = layer.norm(ops::add(x, layer.cross(x, instruction)));
    x = gasa_layer(x, distances, layer.gasa);
  }
  for (const auto& g : model.gasa_stack) x = gasa_layer(x, distances, g);
  return x;
}

std::size_t ActionScores::index_of(NodeId id) const {
  auto it = std::find(nodes.begin(), nodes.end(), id);
  if (it == nodes.end()) throw LabelError("node " + std::to_string(id) + " not in memory graph");
  return static_cast<std::size_t>(it - nodes.begin());
}

std::vector<double> ActionScores::masked() const {
  std::vector<double> out(logits.values().begin(), logits.values().end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!mask(i)) out[i] = -std::numeric_limits<double>::infinity();
  }
  return out;
}

ActionScores score_actions(const Tensor& contextual, const GraphMemory& mem,
                           const PolicyModel& model) {
  ActionScores s;
  s.nodes = mem.ordered_nodes();
  if (contextual.rows() != s.nodes.size()) {
    throw DimensionError("score_actions: " + std::to_string(contextual.rows()) +
                         " embeddings for " + std::to_string(s.nodes.size()) + " nodes");
  }
  s.logits = ops::transpose(model.score_head(contextual));
  std::vector<bool> keep;
  keep.reserve(s.nodes.size());
  for (NodeId id : s.nodes) keep.push_back(mem.status(id) != NodeStatus::Visited);
  s.mask = Mask::row(std::move(keep));
  return s;
}

ActionScores policy_scores(const GraphMemory& mem, const Tensor& instruction,
                           const PolicyModel& model) {
  Tensor nodes = encode_nodes(mem, model);
  Tensor ctx = cross_modal_encode(nodes, instruction, affinity_distances(mem), model);
  return score_actions(ctx, mem, model);
}

NodeId greedy_action(const ActionScores& scores) {
  auto z = scores.logits.values();
  std::size_t best = scores.nodes.size();
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (!scores.mask(i)) continue;
    if (best == scores.nodes.size() || z[i] > z[best]) best = i;
  }
  // The stop node is never masked.
  return scores.nodes.at(best);
}

NodeId sample_action(const ActionScores& scores, Rng& rng, double temperature) {
  if (!(temperature > 0.0)) throw ValidationError("sampling temperature must be positive");
  auto z = scores.logits.values();
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < z.size(); ++i)
    if (scores.mask(i)) mx = std::max(mx, z[i] / temperature);
  std::vector<double> p(z.size(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (!scores.mask(i)) continue;
    p[i] = std::exp(z[i] / temperature - mx);
    total += p[i];
  }
  const double u = uniform(rng, 0.0, 1.0) * total;
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!scores.mask(i)) continue;
    last = i;
    acc += p[i];
    if (u < acc) return scores.nodes[i];
  }
  return scores.nodes[last];
}

Selection select_and_route(const ActionScores& scores, const GraphMemory& mem,
                           const EnvGraph& env, SelectMode mode, Rng* rng, double temperature) {
  Selection sel;
  if (mode == SelectMode::Greedy) {
    sel.target = greedy_action(scores);
  } else {
    if (rng == nullptr) throw ValidationError("sample mode needs a random stream");
    sel.target = sample_action(scores, *rng, temperature);
  }
  sel.route = mem.route_to(env, sel.target);
  return sel;
}

Rollout drive(const Episode& episode, const EnvGraph& env, const PolicyModel& model,
              LatentCache& latents, int max_steps, const Chooser& choose, bool keep_logs) {
  Rollout out;
  GraphMemory mem;
  double heading = kStartHeading;
  NodeId here = episode.start;
  Observation obs = observe(env, here, heading);
  StepLatents step_latents = latents.fetch(episode, obs);
  mem.update(env, here, heading, obs, step_latents.merged);
  Tensor instruction = step_latents.instruction;
  out.trajectory.push_back(here);

  for (int step = 0; step < max_steps; ++step) {
    ActionScores scores = policy_scores(mem, instruction, model);
    const NodeId target = choose(step, mem, scores);
    std::vector<NodeId> route = mem.route_to(env, target);
    if (keep_logs) {
      out.steps.push_back(StepLog{step, mem.current(), scores.nodes, scores.masked(), target, route});
    }
    if (target == kStopNode) {
      out.stopped = true;
      break;
    }
    for (NodeId next : route) {
      heading = bearing_degrees(env.position(here), env.position(next));
      here = next;
      if (mem.contains(here) && mem.status(here) == NodeStatus::Visited) {
        mem.update(env, here, heading, Observation{here, heading, {}}, {});
      } else {
        obs = observe(env, here, heading);
        step_latents = latents.fetch(episode, obs);
        mem.update(env, here, heading, obs, step_latents.merged);
        instruction = step_latents.instruction;
      }
      out.trajectory.push_back(here);
    }
  }
  return out;
}

Rollout rollout(const Episode& episode, const EnvGraph& env, const PolicyModel& model,
                LatentCache& latents, SelectMode mode, int max_steps, std::uint64_t seed,
                double temperature, bool keep_logs) {
  Rng rng(seed);
  Chooser choose = [&](int, const GraphMemory&, const ActionScores& scores) {
    return mode == SelectMode::Greedy ? greedy_action(scores)
                                      : sample_action(scores, rng, temperature);
  };
  NoGradScope no_grad;
  return drive(episode, env, model, latents, max_steps, choose, keep_logs);
}

std::string rollout_log_jsonl(const Rollout& r) {
  std::string out;
  for (const auto& s : r.steps) {
    nlohmann::json scores = nlohmann::json::array();
    for (double v : s.scores) {
      if (std::isfinite(v)) scores.push_back(v);
      else scores.push_back(nullptr);
    }
    nlohmann::json line = {{"step", s.step},         {"current", s.current},
                           {"candidates", s.candidates}, {"scores", scores},
                           {"chosen", s.chosen},     {"route", s.route}};
    out += line.dump() + "\n";
  }
  return out;
}

}  // namespace navlab
