#include "navlab/config.hpp"

#include <set>

#include "navlab/error.hpp"
#include "navlab/io.hpp"
#include "navlab/rng.hpp"

namespace navlab {

using nlohmann::json;

namespace {

std::string rule_name(PseudoLabelRule r) {
  return r == PseudoLabelRule::Remaining ? "remaining" : "memory_plus_remaining";
}

PseudoLabelRule rule_from(const std::string& s) {
  if (s == "memory_plus_remaining") return PseudoLabelRule::MemoryPlusRemaining;
  if (s == "remaining") return PseudoLabelRule::Remaining;
  throw ConfigError("training.pseudo_label: unknown rule '" + s + "'");
}

class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) throw ConfigError(path_ + " must be an object");
  }

  template <typename T>
  void operator()(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(path_ + key + ": wrong type");
    }
  }

  void operator()(const char* key, PseudoLabelRule& out) {
    std::string s = rule_name(out);
    (*this)(key, s);
    out = rule_from(s);
  }

  template <typename T>
  void section(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    Reader child(j_.at(key), path_ + key + ".");
    visit(child, out);
    child.finish();
  }

  void finish() const {
    for (const auto& [k, _] : j_.items()) {
      if (!seen_.count(k)) throw ConfigError("unknown config key '" + path_ + k + "'");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

class Writer {
 public:
  template <typename T>
  void operator()(const char* key, const T& value) {
    j_[key] = value;
  }
  void operator()(const char* key, const PseudoLabelRule& value) { j_[key] = rule_name(value); }

  template <typename T>
  void section(const char* key, T& value) {
    Writer child;
    visit(child, value);
    j_[key] = std::move(child.j_);
  }

  json j_ = json::object();
};

template <typename V>
void visit(V& v, WorldConfig& c) {
  v("landmarks", c.landmarks);
  v("nodes", c.nodes);
  v("radius", c.radius);
  v("min_hops", c.min_hops);
  v("max_hops", c.max_hops);
}

template <typename V>
void visit(V& v, DataConfig& c) {
  v("train_envs", c.train_envs);
  v("train_episodes", c.train_episodes);
  v("eval_envs", c.eval_envs);
  v("eval_episodes", c.eval_episodes);
  v("train_worlds", c.train_worlds);
  v("train_episodes_per_world", c.train_episodes_per_world);
  v("eval_worlds", c.eval_worlds);
  v("eval_episodes_per_world", c.eval_episodes_per_world);
}

template <typename V>
void visit(V& v, LatentConfig& c) {
  v("d_v", c.d_v);
  v("d_q", c.d_q);
  v("d_lm", c.d_lm);
  v("num_queries", c.num_queries);
  v("qformer_depth", c.qformer_depth);
  v("encoder_depth", c.encoder_depth);
  v("heads", c.heads);
  v("ffn_mult", c.ffn_mult);
  v("causal", c.causal);
  v("position_encoding", c.position_encoding);
  v("trainable", c.trainable);
  v("max_seq_len", c.max_seq_len);
}

template <typename V>
void visit(V& v, PolicyConfig& c) {
  v("hidden", c.hidden);
  v("heads", c.heads);
  v("ffn_hidden", c.ffn_hidden);
  v("node_encoder_depth", c.node_encoder_depth);
  v("cross_modal_depth", c.cross_modal_depth);
  v("gasa_layers", c.gasa_layers);
  v("step_table_size", c.step_table_size);
  v("affinity_w_init", c.affinity_w_init);
}

template <typename V>
void visit(V& v, TrainingConfig& c) {
  v("lambda", c.lambda);
  v("dagger", c.dagger);
  v("dagger_start", c.dagger_start);
  v("alternate", c.alternate);
  v("temperature", c.temperature);
  v("stop_radius", c.stop_radius);
  v("pseudo_label", c.pseudo_label);
  v("lr_peak", c.lr_peak);
  v("lr_floor", c.lr_floor);
  v("warmup_steps", c.warmup_steps);
  v("total_steps", c.total_steps);
  v("batch_size", c.batch_size);
  v("weight_decay", c.weight_decay);
  v("beta1", c.beta1);
  v("beta2", c.beta2);
  v("adam_eps", c.adam_eps);
  v("eval_every", c.eval_every);
  v("checkpoint_every", c.checkpoint_every);
}

template <typename V>
void visit(V& v, EvalConfig& c) {
  v("max_steps", c.max_steps);
  v("success_threshold", c.success_threshold);
  v("threads", c.threads);
}

template <typename V>
void visit(V& v, Stage1Reference& c) {
  v("steps", c.steps);
  v("warmup_steps", c.warmup_steps);
  v("lr_peak", c.lr_peak);
  v("lr_floor", c.lr_floor);
  v("batch_size", c.batch_size);
}

template <typename V>
void visit(V& v, RunConfig& c) {
  v("seed", c.seed);
  v.section("world", c.world);
  v.section("data", c.data);
  v.section("latent", c.latent);
  v.section("policy", c.policy);
  v.section("training", c.training);
  v.section("evaluation", c.evaluation);
  v("output_dir", c.output_dir);
  v.section("stage1_reference", c.stage1_reference);
}

void validate(const RunConfig& c) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("invalid config: ") + what);
  };
  require(c.world.landmarks >= 1, "world.landmarks >= 1");
  require(c.world.nodes >= 2, "world.nodes >= 2");
  require(c.world.radius > 0.0, "world.radius > 0");
  require(c.world.min_hops >= 1 && c.world.max_hops >= c.world.min_hops, "1 <= min_hops <= max_hops");
  require(c.training.lambda >= 0.0, "training.lambda >= 0");
  require(c.training.temperature > 0.0, "training.temperature > 0");
  require(c.training.dagger_start >= 0, "training.dagger_start >= 0");
  require(c.training.batch_size >= 1, "training.batch_size >= 1");
  require(c.training.total_steps >= 0, "training.total_steps >= 0");
  require(c.training.warmup_steps >= 0, "training.warmup_steps >= 0");
  require(c.training.lr_peak > 0.0 && c.training.lr_floor >= 0.0, "positive learning rates");
  require(c.evaluation.max_steps >= 0, "evaluation.max_steps >= 0");
  require(c.evaluation.success_threshold > 0.0, "evaluation.success_threshold > 0");
  require(c.latent.num_queries >= 1, "latent.num_queries >= 1");
  require(c.policy.hidden >= 1, "policy.hidden >= 1");
}

}  // namespace

void RunConfig::resolve() {
  latent.landmark_vocab = world.landmarks;
  policy.latent_dim = latent.d_lm;
}

RunConfig config_from_json(const json& doc) {
  RunConfig c;
  Reader reader(doc, "");
  visit(reader, c);
  reader.finish();
  c.resolve();
  validate(c);
  return c;
}

json config_to_json(const RunConfig& config) {
  RunConfig copy = config;
  Writer writer;
  visit(writer, copy);
  return writer.j_;
}

RunConfig load_config(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(io::read_text(path));
  } catch (const json::exception& ex) {
    throw ConfigError(path.string() + ": " + ex.what());
  }
  return config_from_json(doc);
}

std::string canonical_config(const RunConfig& config) {
  // Where a run writes and how many threads evaluate it do not change results.
  json j = config_to_json(config);
  j.erase("output_dir");
  j["evaluation"].erase("threads");
  return j.dump();
}

std::uint64_t config_hash(const RunConfig& config) { return fnv1a64(canonical_config(config)); }

}  // namespace navlab
