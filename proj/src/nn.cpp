#include "navlab/nn.hpp"

#include <cmath>

#include "navlab/error.hpp"

namespace navlab::nn {

void set_trainable(const ParameterList& params, bool trainable) {
  for (const auto& p : params) const_cast<Tensor&>(p.tensor).set_requires_grad(trainable);
}

void zero_grad(const ParameterList& params) {
  for (const auto& p : params) const_cast<Tensor&>(p.tensor).zero_grad();
}

std::size_t parameter_count(const ParameterList& params) {
  std::size_t n = 0;
  for (const auto& p : params) n += p.tensor.size();
  return n;
}

Tensor uniform_parameter(Rng& rng, Shape shape, double bound) {
  std::vector<double> values(shape_size(shape));
  for (auto& v : values) v = uniform(rng, -bound, bound);
  return Tensor::parameter(std::move(shape), std::move(values));
}

Linear::Linear(std::size_t in, std::size_t out, Rng& rng, bool with_bias) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  weight = uniform_parameter(rng, {in, out}, bound);
  if (with_bias) bias = uniform_parameter(rng, {out}, bound);
}

Tensor Linear::operator()(const Tensor& x) const {
  if (bias.defined()) return ops::linear(x, weight, bias);
  return ops::matmul(x, weight);
}

void Linear::collect(const std::string& prefix, ParameterList& out) const {
  out.push_back({prefix + ".weight", weight});
  if (bias.defined()) out.push_back({prefix + ".bias", bias});
}

LayerNorm::LayerNorm(std::size_t d)
    : gain(Tensor::parameter({d}, std::vector<double>(d, 1.0))),
      shift(Tensor::parameter({d}, std::vector<double>(d, 0.0))) {}

void LayerNorm::collect(const std::string& prefix, ParameterList& out) const {
  out.push_back({prefix + ".gain", gain});
  out.push_back({prefix + ".shift", shift});
}

FeedForward::FeedForward(std::size_t d_in, std::size_t hidden, std::size_t d_out, Rng& rng)
    : in(d_in, hidden, rng), out(hidden, d_out, rng) {}

void FeedForward::collect(const std::string& prefix, ParameterList& out_params) const {
  in.collect(prefix + ".in", out_params);
  out.collect(prefix + ".out", out_params);
}

Attention::Attention(std::size_t d_query, std::size_t d_kv, std::size_t d_inner, std::size_t d_out,
                     std::size_t heads_, Rng& rng)
    : wq(d_query, d_inner, rng, false),
      wk(d_kv, d_inner, rng, false),
      wv(d_kv, d_inner, rng, false),
      wo(d_inner, d_out, rng),
      heads(heads_) {
  if (heads == 0 || d_inner % heads != 0) {
    throw DimensionError("attention: inner width " + std::to_string(d_inner) +
                         " not divisible by " + std::to_string(heads) + " heads");
  }
}

Tensor Attention::operator()(const Tensor& query, const Tensor& context, const Tensor& bias,
                             const Mask* mask) const {
  Tensor q = wq(query);
  Tensor k = wk(context);
  Tensor v = wv(context);
  if (heads == 1) return wo(ops::scaled_dot_attention(q, k, v, bias, mask));
  const std::size_t width = q.cols() / heads;
  std::vector<Tensor> outputs;
  outputs.reserve(heads);
  for (std::size_t h = 0; h < heads; ++h) {
    const std::size_t b = h * width, e = b + width;
    outputs.push_back(ops::scaled_dot_attention(ops::slice_cols(q, b, e), ops::slice_cols(k, b, e),
                                                ops::slice_cols(v, b, e), bias, mask));
  }
  return wo(ops::concat_cols(outputs));
}

void Attention::collect(const std::string& prefix, ParameterList& out) const {
  wq.collect(prefix + ".wq", out);
  wk.collect(prefix + ".wk", out);
  wv.collect(prefix + ".wv", out);
  wo.collect(prefix + ".wo", out);
}

EncoderLayer::EncoderLayer(std::size_t d, std::size_t ffn_hidden, std::size_t heads, Rng& rng)
    : attn(d, d, d, d, heads, rng), norm1(d), ffn(d, ffn_hidden, d, rng), norm2(d) {}

Tensor EncoderLayer::attention_sublayer(const Tensor& x, const Tensor& bias,
                                        const Mask* mask) const {
  return norm1(ops::add(x, attn(x, x, bias, mask)));
}

Tensor EncoderLayer::operator()(const Tensor& x, const Tensor& bias, const Mask* mask) const {
  Tensor h = attention_sublayer(x, bias, mask);
  return norm2(ops::add(h, ffn(h)));
}

void EncoderLayer::collect(const std::string& prefix, ParameterList& out) const {
  attn.collect(prefix + ".attn", out);
  norm1.collect(prefix + ".norm1", out);
  ffn.collect(prefix + ".ffn", out);
  norm2.collect(prefix + ".norm2", out);
}

Mask causal_mask(std::size_t n) {
  Mask m{{n, n}, std::vector<unsigned char>(n * n, 0)};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) m.keep[i * n + j] = 1;
  return m;
}

Tensor sinusoidal_positions(std::size_t n, std::size_t d) {
  std::vector<double> values(n * d);
  for (std::size_t pos = 0; pos < n; ++pos) {
    for (std::size_t i = 0; i < d; ++i) {
      const double freq = std::pow(10000.0, -static_cast<double>(2 * (i / 2)) / static_cast<double>(d));
      const double angle = static_cast<double>(pos) * freq;
      values[pos * d + i] = (i % 2 == 0) ? std::sin(angle) : std::cos(angle);
    }
  }
  return Tensor({n, d}, std::move(values));
}

}  // namespace navlab::nn
