#include "navlab/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "navlab/error.hpp"
#include "navlab/kernels.hpp"

namespace navlab::ops {

namespace {

using StoragePtr = std::shared_ptr<TensorStorage>;

void accumulate(const StoragePtr& s, std::span<const double> g) {
  if (!s->requires_grad) return;
  if (s->grad.empty()) {
    s->grad.assign(g.begin(), g.end());
    return;
  }
  for (std::size_t i = 0; i < g.size(); ++i) s->grad[i] += g[i];
}

[[noreturn]] void mismatch(const char* op, const Tensor& a, const Tensor& b) {
  throw DimensionError(std::string(op) + ": incompatible shapes " + shape_string(a.shape()) +
                       " and " + shape_string(b.shape()));
}

void require_matrix(const char* op, const Tensor& a) {
  if (a.rank() != 2) {
    throw DimensionError(std::string(op) + ": expected a matrix, got " + shape_string(a.shape()));
  }
}

void record(std::function<void()> fn) { active_tape()->record(std::move(fn)); }

template <typename Fn>
Tensor elementwise_binary(const char* name, const Tensor& a, const Tensor& b, Fn fn) {
  if (a.shape() != b.shape()) mismatch(name, a, b);
  std::vector<double> out(a.size());
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fn(av[i], bv[i]);
  return make_result(a.shape(), std::move(out), should_record({&a, &b}));
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_matrix("matmul", a);
  require_matrix("matmul", b);
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  if (b.rows() != k) mismatch("matmul", a, b);
  std::vector<double> out(n * m, 0.0);
  kernels::gemm_nn(a.values(), b.values(), out, n, k, m);
  const bool track = should_record({&a, &b});
  Tensor result = make_result({n, m}, std::move(out), track);
  if (track) {
    record([as = a.storage(), bs = b.storage(), os = result.storage(), n, k, m] {
      if (os->grad.empty()) return;
      if (as->requires_grad) {
        std::vector<double> ga(n * k, 0.0);
        kernels::gemm_nt(os->grad, bs->values, ga, n, m, k);
        accumulate(as, ga);
      }
      if (bs->requires_grad) {
        std::vector<double> gb(k * m, 0.0);
        kernels::gemm_tn(as->values, os->grad, gb, k, n, m);
        accumulate(bs, gb);
      }
    });
  }
  return result;
}

Tensor transpose(const Tensor& a) {
  require_matrix("transpose", a);
  const std::size_t n = a.rows(), m = a.cols();
  std::vector<double> out(n * m);
  auto av = a.values();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) out[j * n + i] = av[i * m + j];
  const bool track = should_record({&a});
  Tensor result = make_result({m, n}, std::move(out), track);
  if (track) {
    record([as = a.storage(), os = result.storage(), n, m] {
      if (os->grad.empty()) return;
      std::vector<double> g(n * m);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) g[i * m + j] = os->grad[j * n + i];
      accumulate(as, g);
    });
  }
  return result;
}

Tensor add(const Tensor& a, const Tensor& b) {
  Tensor result = elementwise_binary("add", a, b, [](double x, double y) { return x + y; });
  if (result.requires_grad()) {
    record([as = a.storage(), bs = b.storage(), os = result.storage()] {
      if (os->grad.empty()) return;
      accumulate(as, os->grad);
      accumulate(bs, os->grad);
    });
  }
  return result;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  Tensor result = elementwise_binary("sub", a, b, [](double x, double y) { return x - y; });
  if (result.requires_grad()) {
    record([as = a.storage(), bs = b.storage(), os = result.storage()] {
      if (os->grad.empty()) return;
      accumulate(as, os->grad);
      std::vector<double> g(os->grad.size());
      for (std::size_t i = 0; i < g.size(); ++i) g[i] = -os->grad[i];
      accumulate(bs, g);
    });
  }
  return result;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  Tensor result = elementwise_binary("mul", a, b, [](double x, double y) { return x * y; });
  if (result.requires_grad()) {
    record([as = a.storage(), bs = b.storage(), os = result.storage()] {
      if (os->grad.empty()) return;
      const std::size_t n = os->grad.size();
      std::vector<double> g(n);
      if (as->requires_grad) {
        for (std::size_t i = 0; i < n; ++i) g[i] = os->grad[i] * bs->values[i];
        accumulate(as, g);
      }
      if (bs->requires_grad) {
        for (std::size_t i = 0; i < n; ++i) g[i] = os->grad[i] * as->values[i];
        accumulate(bs, g);
      }
    });
  }
  return result;
}

Tensor add_row(const Tensor& a, const Tensor& row) {
  const std::size_t m = a.cols();
  if (row.size() != m || (row.rank() == 2 && row.rows() != 1) || row.rank() > 2) {
    mismatch("add_row", a, row);
  }
  const std::size_t n = a.size() / m;
  std::vector<double> out(a.values().begin(), a.values().end());
  auto rv = row.values();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) out[i * m + j] += rv[j];
  const bool track = should_record({&a, &row});
  Tensor result = make_result(a.shape(), std::move(out), track);
  if (track) {
    record([as = a.storage(), rs = row.storage(), os = result.storage(), n, m] {
      if (os->grad.empty()) return;
      accumulate(as, os->grad);
      if (rs->requires_grad) {
        std::vector<double> g(m, 0.0);
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < m; ++j) g[j] += os->grad[i * m + j];
        accumulate(rs, g);
      }
    });
  }
  return result;
}

Tensor scale(const Tensor& a, double s) {
  std::vector<double> out(a.values().begin(), a.values().end());
  for (auto& v : out) v *= s;
  const bool track = should_record({&a});
  Tensor result = make_result(a.shape(), std::move(out), track);
  if (track) {
    record([as = a.storage(), os = result.storage(), s] {
      if (os->grad.empty()) return;
      std::vector<double> g(os->grad);
      for (auto& v : g) v *= s;
      accumulate(as, g);
    });
  }
  return result;
}

Tensor scalar_affine(const Tensor& x, const Tensor& w, const Tensor& b) {
  if (w.size() != 1 || b.size() != 1) mismatch("scalar_affine", w, b);
  const double wv = w.item(), bv = b.item();
  std::vector<double> out(x.values().begin(), x.values().end());
  for (auto& v : out) v = wv * v + bv;
  const bool track = should_record({&x, &w, &b});
  Tensor result = make_result(x.shape(), std::move(out), track);
  if (track) {
    record([xs = x.storage(), ws = w.storage(), bs = b.storage(), os = result.storage()] {
      if (os->grad.empty()) return;
      const auto& g = os->grad;
      const double wv = ws->values[0];
      if (xs->requires_grad) {
        std::vector<double> gx(g);
        for (auto& v : gx) v *= wv;
        accumulate(xs, gx);
      }
      double gw = 0.0, gb = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) {
        gw += g[i] * xs->values[i];
        gb += g[i];
      }
      accumulate(ws, std::span<const double>(&gw, 1));
      accumulate(bs, std::span<const double>(&gb, 1));
    });
  }
  return result;
}

namespace {
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluA = 0.044715;
}  // namespace

Tensor gelu(const Tensor& a) {
  std::vector<double> out(a.size());
  auto av = a.values();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double x = av[i];
    out[i] = 0.5 * x * (1.0 + std::tanh(kGeluC * (x + kGeluA * x * x * x)));
  }
  const bool track = should_record({&a});
  Tensor result = make_result(a.shape(), std::move(out), track);
  if (track) {
    record([as = a.storage(), os = result.storage()] {
      if (os->grad.empty()) return;
      std::vector<double> g(os->grad.size());
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double x = as->values[i];
        const double t = std::tanh(kGeluC * (x + kGeluA * x * x * x));
        const double du = kGeluC * (1.0 + 3.0 * kGeluA * x * x);
        g[i] = os->grad[i] * (0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du);
      }
      accumulate(as, g);
    });
  }
  return result;
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  require_matrix("linear", x);
  require_matrix("linear", weight);
  if (x.cols() != weight.rows()) mismatch("linear", x, weight);
  if (bias.size() != weight.cols()) mismatch("linear", weight, bias);
  return add_row(matmul(x, weight), bias);
}

Tensor softmax(const Tensor& x, const Mask* mask) {
  const std::size_t m = x.cols();
  const std::size_t n = x.size() / m;
  if (mask != nullptr && mask->keep.size() != x.size()) {
    throw DimensionError("softmax: mask shape " + shape_string(mask->shape) +
                         " does not match " + shape_string(x.shape()));
  }
  auto xv = x.values();
  std::vector<double> out(x.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t j = 0; j < m; ++j) {
      if (mask && !(*mask)(i * m + j)) continue;
      any = true;
      mx = std::max(mx, xv[i * m + j]);
    }
    if (!any) throw DegenerateMaskError("softmax: row " + std::to_string(i) + " is fully masked");
    double total = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (mask && !(*mask)(i * m + j)) continue;
      const double e = std::exp(xv[i * m + j] - mx);
      out[i * m + j] = e;
      total += e;
    }
    for (std::size_t j = 0; j < m; ++j) out[i * m + j] /= total;
  }
  const bool track = should_record({&x});
  Tensor result = make_result(x.shape(), std::move(out), track);
  if (track) {
    record([xs = x.storage(), os = result.storage(), n, m] {
      if (os->grad.empty()) return;
      const auto& y = os->values;
      const auto& gy = os->grad;
      std::vector<double> g(n * m);
      for (std::size_t i = 0; i < n; ++i) {
        double dot = 0.0;
        for (std::size_t j = 0; j < m; ++j) dot += y[i * m + j] * gy[i * m + j];
        for (std::size_t j = 0; j < m; ++j) g[i * m + j] = y[i * m + j] * (gy[i * m + j] - dot);
      }
      accumulate(xs, g);
    });
  }
  return result;
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& shift, double eps) {
  const std::size_t d = x.cols();
  if (gain.size() != d) mismatch("layer_norm", x, gain);
  if (shift.size() != d) mismatch("layer_norm", x, shift);
  if (!(eps > 0.0)) throw DimensionError("layer_norm: eps must be positive");
  const std::size_t n = x.size() / d;
  auto xv = x.values();
  auto gv = gain.values();
  auto sv = shift.values();
  std::vector<double> normed(x.size()), inv_std(n), out(x.size());
  for (std::size_t i = 0; i < n; ++i) {
    double mean = 0.0;
    for (std::size_t j = 0; j < d; ++j) mean += xv[i * d + j];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double c = xv[i * d + j] - mean;
      var += c * c;
    }
    var /= static_cast<double>(d);
    inv_std[i] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < d; ++j) {
      normed[i * d + j] = (xv[i * d + j] - mean) * inv_std[i];
      out[i * d + j] = gv[j] * normed[i * d + j] + sv[j];
    }
  }
  const bool track = should_record({&x, &gain, &shift});
  Tensor result = make_result(x.shape(), std::move(out), track);
  if (track) {
    record([xs = x.storage(), gs = gain.storage(), ss = shift.storage(), os = result.storage(),
            normed = std::move(normed), inv_std = std::move(inv_std), n, d] {
      if (os->grad.empty()) return;
      const auto& gy = os->grad;
      const auto& gv = gs->values;
      if (gs->requires_grad || ss->requires_grad) {
        std::vector<double> gg(d, 0.0), gb(d, 0.0);
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < d; ++j) {
            gg[j] += gy[i * d + j] * normed[i * d + j];
            gb[j] += gy[i * d + j];
          }
        accumulate(gs, gg);
        accumulate(ss, gb);
      }
      if (xs->requires_grad) {
        std::vector<double> gx(n * d);
        const double dd = static_cast<double>(d);
        for (std::size_t i = 0; i < n; ++i) {
          double s1 = 0.0, s2 = 0.0;
          for (std::size_t j = 0; j < d; ++j) {
            const double dxh = gy[i * d + j] * gv[j];
            s1 += dxh;
            s2 += dxh * normed[i * d + j];
          }
          for (std::size_t j = 0; j < d; ++j) {
            const double dxh = gy[i * d + j] * gv[j];
            gx[i * d + j] = inv_std[i] / dd * (dd * dxh - s1 - normed[i * d + j] * s2);
          }
        }
        accumulate(xs, gx);
      }
    });
  }
  return result;
}

Tensor scaled_dot_attention(const Tensor& q, const Tensor& k, const Tensor& v, const Tensor& bias,
                            const Mask* mask) {
  require_matrix("attention", q);
  require_matrix("attention", k);
  require_matrix("attention", v);
  if (q.cols() != k.cols()) mismatch("attention", q, k);
  if (k.rows() != v.rows()) mismatch("attention", k, v);
  const std::size_t n = q.rows(), mk = k.rows();
  if (bias.defined() && (bias.rank() != 2 || bias.rows() != n || bias.cols() != mk)) {
    throw DimensionError("attention: bias shape " + shape_string(bias.shape()) + " expected [" +
                         std::to_string(n) + "x" + std::to_string(mk) + "]");
  }
  if (mask != nullptr && mask->keep.size() != n * mk) {
    throw DimensionError("attention: mask shape " + shape_string(mask->shape) + " expected [" +
                         std::to_string(n) + "x" + std::to_string(mk) + "]");
  }
  Tensor logits = scale(matmul(q, transpose(k)), 1.0 / std::sqrt(static_cast<double>(q.cols())));
  if (bias.defined()) logits = add(logits, bias);
  return matmul(softmax(logits, mask), v);
}

Tensor mean_rows(const Tensor& x) {
  const std::size_t d = x.cols();
  const std::size_t n = x.size() / d;
  std::vector<double> out(d, 0.0);
  auto xv = x.values();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) out[j] += xv[i * d + j];
  for (auto& v : out) v /= static_cast<double>(n);
  const bool track = should_record({&x});
  Tensor result = make_result({1, d}, std::move(out), track);
  if (track) {
    record([xs = x.storage(), os = result.storage(), n, d] {
      if (os->grad.empty()) return;
      std::vector<double> g(n * d);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) g[i * d + j] = os->grad[j] / static_cast<double>(n);
      accumulate(xs, g);
    });
  }
  return result;
}

Tensor sum(const Tensor& x) {
  double total = 0.0;
  for (double v : x.values()) total += v;
  const bool track = should_record({&x});
  Tensor result = make_result({1}, {total}, track);
  if (track) {
    record([xs = x.storage(), os = result.storage()] {
      if (os->grad.empty()) return;
      std::vector<double> g(xs->values.size(), os->grad[0]);
      accumulate(xs, g);
    });
  }
  return result;
}

Tensor concat_rows(std::span<const Tensor> parts) {
  if (parts.empty()) throw DimensionError("concat_rows: no inputs");
  const std::size_t d = parts.front().cols();
  std::size_t total_rows = 0;
  bool track = false;
  for (const auto& p : parts) {
    if (p.cols() != d || p.rank() > 2) mismatch("concat_rows", parts.front(), p);
    total_rows += p.size() / d;
    track = track || should_record({&p});
  }
  std::vector<double> out;
  out.reserve(total_rows * d);
  for (const auto& p : parts) out.insert(out.end(), p.values().begin(), p.values().end());
  Tensor result = make_result({total_rows, d}, std::move(out), track);
  if (track) {
    std::vector<StoragePtr> inputs;
    for (const auto& p : parts) inputs.push_back(p.storage());
    record([inputs = std::move(inputs), os = result.storage()] {
      if (os->grad.empty()) return;
      std::size_t offset = 0;
      for (const auto& s : inputs) {
        const std::size_t len = s->values.size();
        accumulate(s, std::span<const double>(os->grad.data() + offset, len));
        offset += len;
      }
    });
  }
  return result;
}

Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t end) {
  require_matrix("slice_rows", x);
  if (begin >= end || end > x.rows()) {
    throw DimensionError("slice_rows: range [" + std::to_string(begin) + "," +
                         std::to_string(end) + ") out of " + shape_string(x.shape()));
  }
  const std::size_t d = x.cols();
  std::vector<double> out(x.values().begin() + begin * d, x.values().begin() + end * d);
  const bool track = should_record({&x});
  Tensor result = make_result({end - begin, d}, std::move(out), track);
  if (track) {
    record([xs = x.storage(), os = result.storage(), begin, d] {
      if (os->grad.empty() || !xs->requires_grad) return;
      if (xs->grad.empty()) xs->grad.assign(xs->values.size(), 0.0);
      for (std::size_t i = 0; i < os->grad.size(); ++i) xs->grad[begin * d + i] += os->grad[i];
    });
  }
  return result;
}

Tensor concat_cols(std::span<const Tensor> parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no inputs");
  const std::size_t n = parts.front().rows();
  std::size_t total_cols = 0;
  bool track = false;
  for (const auto& p : parts) {
    require_matrix("concat_cols", p);
    if (p.rows() != n) mismatch("concat_cols", parts.front(), p);
    total_cols += p.cols();
    track = track || should_record({&p});
  }
  std::vector<double> out(n * total_cols);
  std::size_t offset = 0;
  for (const auto& p : parts) {
    const std::size_t c = p.cols();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < c; ++j) out[i * total_cols + offset + j] = p.values()[i * c + j];
    offset += c;
  }
  Tensor result = make_result({n, total_cols}, std::move(out), track);
  if (track) {
    std::vector<StoragePtr> inputs;
    for (const auto& p : parts) inputs.push_back(p.storage());
    record([inputs = std::move(inputs), os = result.storage(), n, total_cols] {
      if (os->grad.empty()) return;
      std::size_t offset = 0;
      for (const auto& s : inputs) {
        const std::size_t c = s->shape.back();
        if (s->requires_grad) {
          std::vector<double> g(n * c);
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < c; ++j) g[i * c + j] = os->grad[i * total_cols + offset + j];
          accumulate(s, g);
        }
        offset += c;
      }
    });
  }
  return result;
}

Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t end) {
  require_matrix("slice_cols", x);
  if (begin >= end || end > x.cols()) {
    throw DimensionError("slice_cols: range [" + std::to_string(begin) + "," +
                         std::to_string(end) + ") out of " + shape_string(x.shape()));
  }
  const std::size_t n = x.rows(), d = x.cols(), w = end - begin;
  std::vector<double> out(n * w);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < w; ++j) out[i * w + j] = x.values()[i * d + begin + j];
  const bool track = should_record({&x});
  Tensor result = make_result({n, w}, std::move(out), track);
  if (track) {
    record([xs = x.storage(), os = result.storage(), n, d, w, begin] {
      if (os->grad.empty() || !xs->requires_grad) return;
      if (xs->grad.empty()) xs->grad.assign(xs->values.size(), 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < w; ++j) xs->grad[i * d + begin + j] += os->grad[i * w + j];
    });
  }
  return result;
}

Tensor gather_rows(const Tensor& table, std::span<const std::size_t> indices) {
  require_matrix("gather_rows", table);
  if (indices.empty()) throw DimensionError("gather_rows: no indices");
  const std::size_t d = table.cols();
  std::vector<double> out(indices.size() * d);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= table.rows()) {
      throw DimensionError("gather_rows: index " + std::to_string(indices[i]) + " outside " +
                           shape_string(table.shape()));
    }
    std::copy_n(table.values().begin() + indices[i] * d, d, out.begin() + i * d);
  }
  const bool track = should_record({&table});
  Tensor result = make_result({indices.size(), d}, std::move(out), track);
  if (track) {
    record([ts = table.storage(), os = result.storage(),
            idx = std::vector<std::size_t>(indices.begin(), indices.end()), d] {
      if (os->grad.empty() || !ts->requires_grad) return;
      if (ts->grad.empty()) ts->grad.assign(ts->values.size(), 0.0);
      for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j < d; ++j) ts->grad[idx[i] * d + j] += os->grad[i * d + j];
    });
  }
  return result;
}

Tensor cross_entropy(const Tensor& logits, const Mask& mask, std::size_t label) {
  const std::size_t n = logits.size();
  if (logits.rows() != 1 || mask.keep.size() != n) {
    throw DimensionError("cross_entropy: logits " + shape_string(logits.shape()) + " with mask " +
                         shape_string(mask.shape));
  }
  if (label >= n || !mask(label)) {
    throw LabelError("cross_entropy: label " + std::to_string(label) + " is not a valid choice");
  }
  auto z = logits.values();
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i)
    if (mask(i)) mx = std::max(mx, z[i]);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (mask(i)) total += std::exp(z[i] - mx);
  const double loss = -(z[label] - mx - std::log(total));
  const bool track = should_record({&logits});
  Tensor result = make_result({1}, {loss}, track);
  if (track) {
    record([ls = logits.storage(), os = result.storage(), keep = mask.keep, label, mx, total, n] {
      if (os->grad.empty()) return;
      std::vector<double> g(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        if (!keep[i]) continue;
        g[i] = std::exp(ls->values[i] - mx) / total;
      }
      g[label] -= 1.0;
      for (auto& v : g) v *= os->grad[0];
      accumulate(ls, g);
    });
  }
  return result;
}

}  // namespace navlab::ops
