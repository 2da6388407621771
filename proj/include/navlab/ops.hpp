#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "navlab/tensor.hpp"

// Differentiable primitives. Every op records a backward closure on the
// active tape when any input requires a gradient; shapes are checked eagerly
// and mismatches throw DimensionError naming both shapes.

namespace navlab::ops {

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
/// Adds a length-m row (shape [m] or [1×m]) to every row of a [n×m].
Tensor add_row(const Tensor& a, const Tensor& row);
Tensor scale(const Tensor& a, double s);
/// w·x + b with single-valued w and b.
Tensor scalar_affine(const Tensor& x, const Tensor& w, const Tensor& b);

Tensor gelu(const Tensor& a);

/// x·weight + bias with weight [d_in×d_out] and bias [d_out].
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);

/// Row-wise softmax, stabilised by row-max subtraction. Masked-out entries
/// are exactly zero. A row with no kept entry throws DegenerateMaskError.
Tensor softmax(const Tensor& x, const Mask* mask = nullptr);

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& shift, double eps = 1e-5);

/// softmax(Q·Kᵀ/√d + bias, mask)·V
Tensor scaled_dot_attention(const Tensor& q, const Tensor& k, const Tensor& v,
                            const Tensor& bias = Tensor{}, const Mask* mask = nullptr);

Tensor mean_rows(const Tensor& x);
Tensor sum(const Tensor& x);

Tensor concat_rows(std::span<const Tensor> parts);
Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t end);
Tensor concat_cols(std::span<const Tensor> parts);
Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t end);

/// Embedding lookup: out[i] = table[indices[i]].
Tensor gather_rows(const Tensor& table, std::span<const std::size_t> indices);

/// −log softmax(logits, mask)[label] over a single row of logits.
Tensor cross_entropy(const Tensor& logits, const Mask& mask, std::size_t label);

}  // namespace navlab::ops
