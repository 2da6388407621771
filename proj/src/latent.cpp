#include "navlab/latent.hpp"

#include <cstring>
#include <optional>

#include "navlab/error.hpp"

namespace navlab {

namespace {

std::size_t sz(int v) { return static_cast<std::size_t>(v); }

}  // namespace

LatentProvider::LatentProvider(const LatentConfig& config, std::uint64_t seed) : config_(config) {
  if (config.num_queries < 1 || config.d_v < 1 || config.d_q < 1 || config.d_lm < 1) {
    throw ConfigError("latent provider dimensions must be positive");
  }
  if (config.landmark_vocab < 1) throw ConfigError("latent provider needs a landmark vocabulary");
  const std::size_t vocab = sz(vocabulary());
  const std::size_t heads = sz(config.heads);

  Rng vision = make_stream(seed, "vision");
  landmark_table = nn::uniform_parameter(vision, {sz(config.landmark_vocab), sz(config.d_v)}, 1.0);
  angle_table = nn::uniform_parameter(vision, {sz(kDirectionCount), sz(config.d_v)}, 1.0);
  landmark_table.set_requires_grad(false);
  angle_table.set_requires_grad(false);

  Rng rng = make_stream(seed, "latent");
  queries = nn::uniform_parameter(rng, {sz(config.num_queries), sz(config.d_q)}, 1.0);
  q_token_embed = nn::uniform_parameter(rng, {vocab, sz(config.d_q)}, 1.0);
  for (int i = 0; i < config.qformer_depth; ++i) {
    QFormerBlock block;
    block.self = nn::EncoderLayer(sz(config.d_q), sz(config.d_q * config.ffn_mult), heads, rng);
    block.cross = nn::Attention(sz(config.d_q), sz(config.d_v), sz(config.d_q), sz(config.d_q), heads, rng);
    block.cross_norm = nn::LayerNorm(sz(config.d_q));
    block.ffn = nn::FeedForward(sz(config.d_q), sz(config.d_q * config.ffn_mult), sz(config.d_q), rng);
    block.ffn_norm = nn::LayerNorm(sz(config.d_q));
    qformer.push_back(std::move(block));
  }
  projection = nn::Linear(sz(config.d_q), sz(config.d_lm), rng);
  lm_token_embed = nn::uniform_parameter(rng, {vocab, sz(config.d_lm)}, 1.0);
  for (int i = 0; i < config.encoder_depth; ++i) {
    encoder.emplace_back(sz(config.d_lm), sz(config.d_lm * config.ffn_mult), heads, rng);
  }
  merge = nn::FeedForward(sz(config.d_lm), sz(config.d_lm), sz(config.d_lm), rng);
  positions_ = nn::sinusoidal_positions(sz(config.max_seq_len), sz(config.d_lm));
  set_trainable(config.trainable);
}

void LatentProvider::set_trainable(bool trainable) {
  config_.trainable = trainable;
  nn::set_trainable(parameters(), trainable);
}

nn::ParameterList LatentProvider::parameters() const {
  nn::ParameterList out;
  out.push_back({"latent.queries", queries});
  out.push_back({"latent.q_token_embed", q_token_embed});
  for (std::size_t i = 0; i < qformer.size(); ++i) {
    const auto p = "latent.qformer." + std::to_string(i);
    qformer[i].self.collect(p + ".self", out);
    qformer[i].cross.collect(p + ".cross", out);
    qformer[i].cross_norm.collect(p + ".cross_norm", out);
    qformer[i].ffn.collect(p + ".ffn", out);
    qformer[i].ffn_norm.collect(p + ".ffn_norm", out);
  }
  projection.collect("latent.projection", out);
  out.push_back({"latent.lm_token_embed", lm_token_embed});
  for (std::size_t i = 0; i < encoder.size(); ++i) {
    encoder[i].collect("latent.encoder." + std::to_string(i), out);
  }
  merge.collect("latent.merge", out);
  return out;
}

void LatentProvider::check_tokens(std::span<const int> tokens) const {
  if (tokens.empty()) throw LengthError("instruction is empty");
  for (int t : tokens) {
    if (t < 0 || t >= vocabulary()) {
      throw VocabError("instruction token " + std::to_string(t) + " outside vocabulary of " +
                       std::to_string(vocabulary()));
    }
  }
}

ViewFeature LatentProvider::featurize_view(const Candidate& candidate) const {
  if (candidate.landmark < 0 || candidate.landmark >= config_.landmark_vocab) {
    throw VocabError("landmark " + std::to_string(candidate.landmark) + " outside vocabulary of " +
                     std::to_string(config_.landmark_vocab));
  }
  const std::size_t lm = sz(candidate.landmark);
  const std::size_t bin = static_cast<std::size_t>(direction_of(candidate.angle));
  return ViewFeature{ops::add(ops::gather_rows(landmark_table, std::span(&lm, 1)),
                              ops::gather_rows(angle_table, std::span(&bin, 1)))};
}

QueryLatents LatentProvider::qformer_encode(const ViewFeature& view,
                                            std::span<const int> tokens) const {
  check_tokens(tokens);
  std::vector<std::size_t> idx(tokens.begin(), tokens.end());
  Tensor text = ops::gather_rows(q_token_embed, idx);
  Tensor q = queries;
  const std::size_t nq = q.rows();
  for (const auto& block : qformer) {
    const Tensor parts[] = {q, text};
    Tensor joint = block.self(ops::concat_rows(parts));
    q = ops::slice_rows(joint, 0, nq);
    text = ops::slice_rows(joint, nq, joint.rows());
    q = block.cross_norm(ops::add(q, block.cross(q, view.vector)));
    q = block.ffn_norm(ops::add(q, block.ffn(q)));
  }
  return QueryLatents{q, projection(q)};
}

Tensor LatentProvider::instruction_embeddings(std::span<const int> tokens) const {
  check_tokens(tokens);
  std::vector<std::size_t> idx(tokens.begin(), tokens.end());
  Tensor embed = ops::gather_rows(lm_token_embed, idx);
  if (!config_.position_encoding) return embed;
  return ops::add(embed, ops::slice_rows(positions_, 0, idx.size()));
}

LmLatents LatentProvider::lm_encode(std::span<const Tensor> image_tokens,
                                    std::span<const int> tokens) const {
  if (image_tokens.empty()) throw LengthError("lm_encode needs at least one candidate view");
  check_tokens(tokens);
  const std::size_t instr_len = tokens.size();
  std::size_t total = instr_len;
  for (const auto& t : image_tokens) total += t.rows();
  if (total > sz(config_.max_seq_len)) {
    throw LengthError("sequence of " + std::to_string(total) + " tokens exceeds max_seq_len " +
                      std::to_string(config_.max_seq_len));
  }
  std::vector<std::size_t> idx(tokens.begin(), tokens.end());
  std::vector<Tensor> parts;
  parts.reserve(image_tokens.size() + 1);
  parts.push_back(ops::gather_rows(lm_token_embed, idx));
  for (const auto& t : image_tokens) parts.push_back(t);
  Tensor x = ops::concat_rows(parts);
  if (config_.position_encoding) x = ops::add(x, ops::slice_rows(positions_, 0, total));
  std::optional<Mask> causal;
  if (config_.causal) causal = nn::causal_mask(total);
  for (const auto& layer : encoder) x = layer(x, Tensor{}, causal ? &*causal : nullptr);

  LmLatents out;
  out.instruction = ops::slice_rows(x, 0, instr_len);
  std::size_t offset = instr_len;
  for (const auto& t : image_tokens) {
    Tensor view = ops::slice_rows(x, offset, offset + t.rows());
    offset += t.rows();
    out.merged.push_back(merge(ops::mean_rows(view)));
    out.view_tokens.push_back(std::move(view));
  }
  return out;
}

LmLatents LatentProvider::encode(const Observation& obs, std::span<const int> tokens) const {
  std::vector<Tensor> image_tokens;
  image_tokens.reserve(obs.candidates.size());
  for (const auto& c : obs.candidates) {
    image_tokens.push_back(qformer_encode(featurize_view(c), tokens).image_tokens);
  }
  return lm_encode(image_tokens, tokens);
}

StepLatents LatentCache::fetch(const Episode& episode, const Observation& obs) {
  if (provider_->config().trainable) {
    auto lm = provider_->encode(obs, episode.instruction_tokens);
    return StepLatents{std::move(lm.merged), std::move(lm.instruction)};
  }
  // Provider output depends only on the tokens and the ordered
  // (landmark, direction bin) pairs of the candidates.
  std::vector<int> words(episode.instruction_tokens.begin(), episode.instruction_tokens.end());
  words.push_back(-1);
  for (const auto& c : obs.candidates) {
    words.push_back(c.landmark);
    words.push_back(static_cast<int>(direction_of(c.angle)));
  }
  std::string key(reinterpret_cast<const char*>(words.data()), words.size() * sizeof(int));
  {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(key);
    if (it != entries_.end()) return it->second;
  }
  StepLatents value;
  {
    NoGradScope no_grad;
    auto lm = provider_->encode(obs, episode.instruction_tokens);
    value = StepLatents{std::move(lm.merged), std::move(lm.instruction)};
  }
  std::lock_guard lock(mutex_);
  entries_.emplace(std::move(key), value);
  return value;
}

std::size_t LatentCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

void LatentCache::clear() {
  std::lock_guard lock(mutex_);
  entries_.clear();
}

}  // namespace navlab
