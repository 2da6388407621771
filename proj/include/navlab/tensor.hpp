#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace navlab {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

struct TensorStorage {
  Shape shape;
  std::vector<double> values;
  std::vector<double> grad;  // empty until a gradient is accumulated
  bool requires_grad = false;
};

/// Dense row-major fp64 tensor. Copies share storage (handle semantics);
/// use clone() for a deep copy.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> values);

  static Tensor zeros(Shape shape);
  static Tensor filled(Shape shape, double value);
  static Tensor scalar(double value);
  static Tensor row(std::vector<double> values);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values);
  /// Leaf tensor that accumulates gradients.
  static Tensor parameter(Shape shape, std::vector<double> values);

  bool defined() const { return storage_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t size() const;
  /// Leading extent for rank-2 tensors, 1 for rank-1.
  std::size_t rows() const;
  /// Trailing extent.
  std::size_t cols() const;

  std::span<const double> values() const;
  std::span<double> mutable_values();
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  bool has_grad() const;

  double item() const;
  double at(std::size_t i) const;
  double at(std::size_t r, std::size_t c) const;

  bool requires_grad() const;
  void set_requires_grad(bool flag);
  void zero_grad();
  /// Adds `g` into the gradient buffer, allocating it on first use.
  void accumulate_grad(std::span<const double> g);

  Tensor clone() const;
  Tensor detach() const { return clone(); }

  const std::shared_ptr<TensorStorage>& storage() const { return storage_; }

 private:
  explicit Tensor(std::shared_ptr<TensorStorage> storage) : storage_(std::move(storage)) {}
  std::shared_ptr<TensorStorage> storage_;

  friend Tensor make_result(Shape, std::vector<double>, bool);
};

/// Builds an op output. `track` marks it as part of the recorded graph.
Tensor make_result(Shape shape, std::vector<double> values, bool track);

/// Ordered record of backward closures. Ops append in execution order, so
/// inputs always precede their consumers; backward() walks the list once in
/// reverse and then clears it.
class Tape {
 public:
  void record(std::function<void()> backward_fn);
  /// Seeds d(loss)/d(loss) = 1 and propagates. `loss` must hold one value.
  void backward(const Tensor& loss);
  std::size_t size() const { return ops_.size(); }
  void clear() { ops_.clear(); }

 private:
  std::vector<std::function<void()>> ops_;
};

/// Thread-local active tape; ops record onto it while a scope is open.
Tape* active_tape();

class TapeScope {
 public:
  explicit TapeScope(Tape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* previous_;
};

/// Suspends recording for the enclosed region.
class NoGradScope {
 public:
  NoGradScope();
  ~NoGradScope();
  NoGradScope(const NoGradScope&) = delete;
  NoGradScope& operator=(const NoGradScope&) = delete;

 private:
  Tape* previous_;
};

/// True when an op over these inputs should be recorded.
bool should_record(std::initializer_list<const Tensor*> inputs);

/// Boolean keep-mask: true entries participate, false entries are excluded.
struct Mask {
  Shape shape;
  std::vector<unsigned char> keep;

  static Mask all(Shape shape);
  static Mask row(std::vector<bool> keep);
  bool operator()(std::size_t i) const { return keep[i] != 0; }
};

}  // namespace navlab
