#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "navlab/ops.hpp"
#include "navlab/rng.hpp"
#include "navlab/tensor.hpp"

namespace navlab::nn {

struct NamedParameter {
  std::string name;
  Tensor tensor;
};
using ParameterList = std::vector<NamedParameter>;

void set_trainable(const ParameterList& params, bool trainable);
void zero_grad(const ParameterList& params);
std::size_t parameter_count(const ParameterList& params);

/// Uniform(−bound, bound) parameter.
Tensor uniform_parameter(Rng& rng, Shape shape, double bound);

/// Dense layer; weights ~ U(−1/√d_in, 1/√d_in), as are biases.
struct Linear {
  Tensor weight;
  Tensor bias;  // undefined for bias-free projections

  Linear() = default;
  Linear(std::size_t in, std::size_t out, Rng& rng, bool with_bias = true);
  Tensor operator()(const Tensor& x) const;
  void collect(const std::string& prefix, ParameterList& out) const;
};

struct LayerNorm {
  Tensor gain;
  Tensor shift;
  double eps = 1e-5;

  LayerNorm() = default;
  explicit LayerNorm(std::size_t d);
  Tensor operator()(const Tensor& x) const { return ops::layer_norm(x, gain, shift, eps); }
  void collect(const std::string& prefix, ParameterList& out) const;
};

/// Two-layer perceptron with GELU in between.
struct FeedForward {
  Linear in;
  Linear out;

  FeedForward() = default;
  FeedForward(std::size_t d_in, std::size_t hidden, std::size_t d_out, Rng& rng);
  Tensor operator()(const Tensor& x) const { return out(ops::gelu(in(x))); }
  void collect(const std::string& prefix, ParameterList& out_params) const;
};

/// Multi-head attention with bias-free Q/K/V projections and an output
/// projection. An additive logit bias, when given, is shared by all heads.
struct Attention {
  Linear wq, wk, wv, wo;
  std::size_t heads = 1;

  Attention() = default;
  Attention(std::size_t d_query, std::size_t d_kv, std::size_t d_inner, std::size_t d_out,
            std::size_t heads, Rng& rng);
  Tensor operator()(const Tensor& query, const Tensor& context, const Tensor& bias = Tensor{},
                    const Mask* mask = nullptr) const;
  void collect(const std::string& prefix, ParameterList& out) const;
};

/// Post-norm transformer layer: x ← LN(x + Attn(x)); x ← LN(x + FFN(x)).
struct EncoderLayer {
  Attention attn;
  LayerNorm norm1;
  FeedForward ffn;
  LayerNorm norm2;

  EncoderLayer() = default;
  EncoderLayer(std::size_t d, std::size_t ffn_hidden, std::size_t heads, Rng& rng);
  Tensor operator()(const Tensor& x, const Tensor& bias = Tensor{},
                    const Mask* mask = nullptr) const;
  /// Attention residual sublayer only.
  Tensor attention_sublayer(const Tensor& x, const Tensor& bias = Tensor{},
                            const Mask* mask = nullptr) const;
  void collect(const std::string& prefix, ParameterList& out) const;
};

/// Lower-triangular keep-mask for causal attention over n positions.
Mask causal_mask(std::size_t n);

/// Fixed sinusoidal position table [n×d].
Tensor sinusoidal_positions(std::size_t n, std::size_t d);

}  // namespace navlab::nn
