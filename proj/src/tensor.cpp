#include "navlab/tensor.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "navlab/error.hpp"

namespace navlab {

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (auto e : shape) n *= e;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

namespace {

void validate_shape(const Shape& shape, std::size_t count) {
  if (shape.empty()) throw DimensionError("tensor shape must have at least one extent");
  for (auto e : shape) {
    if (e == 0) throw DimensionError("tensor extents must be positive, got " + shape_string(shape));
  }
  if (shape_size(shape) != count) {
    throw DimensionError("shape " + shape_string(shape) + " does not match " +
                         std::to_string(count) + " values");
  }
}

thread_local Tape* g_active_tape = nullptr;

}  // namespace

Tensor::Tensor(Shape shape, std::vector<double> values) {
  validate_shape(shape, values.size());
  storage_ = std::make_shared<TensorStorage>();
  storage_->shape = std::move(shape);
  storage_->values = std::move(values);
}

Tensor Tensor::zeros(Shape shape) { return filled(std::move(shape), 0.0); }

Tensor Tensor::filled(Shape shape, double value) {
  auto n = shape_size(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value));
}

Tensor Tensor::scalar(double value) { return Tensor({1}, {value}); }

Tensor Tensor::row(std::vector<double> values) {
  auto n = values.size();
  return Tensor({1, n}, std::move(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
  return Tensor({rows, cols}, std::move(values));
}

Tensor Tensor::parameter(Shape shape, std::vector<double> values) {
  Tensor t(std::move(shape), std::move(values));
  t.storage_->requires_grad = true;
  return t;
}

Tensor make_result(Shape shape, std::vector<double> values, bool track) {
  auto storage = std::make_shared<TensorStorage>();
  storage->shape = std::move(shape);
  storage->values = std::move(values);
  storage->requires_grad = track;
  return Tensor(std::move(storage));
}

const Shape& Tensor::shape() const { return storage_->shape; }
std::size_t Tensor::size() const { return storage_->values.size(); }

std::size_t Tensor::rows() const {
  const auto& s = shape();
  return s.size() >= 2 ? s[s.size() - 2] : 1;
}

std::size_t Tensor::cols() const { return shape().back(); }

std::span<const double> Tensor::values() const { return storage_->values; }
std::span<double> Tensor::mutable_values() { return storage_->values; }
std::span<const double> Tensor::grad() const { return storage_->grad; }

std::span<double> Tensor::mutable_grad() {
  if (storage_->grad.empty()) storage_->grad.assign(storage_->values.size(), 0.0);
  return storage_->grad;
}

bool Tensor::has_grad() const { return !storage_->grad.empty(); }

double Tensor::item() const {
  if (size() != 1) throw DimensionError("item() on tensor of shape " + shape_string(shape()));
  return storage_->values[0];
}

double Tensor::at(std::size_t i) const { return storage_->values.at(i); }

double Tensor::at(std::size_t r, std::size_t c) const {
  return storage_->values.at(r * cols() + c);
}

bool Tensor::requires_grad() const { return storage_ && storage_->requires_grad; }
void Tensor::set_requires_grad(bool flag) { storage_->requires_grad = flag; }

void Tensor::zero_grad() {
  std::fill(storage_->grad.begin(), storage_->grad.end(), 0.0);
}

void Tensor::accumulate_grad(std::span<const double> g) {
  auto& buf = storage_->grad;
  if (buf.empty()) {
    buf.assign(g.begin(), g.end());
    return;
  }
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] += g[i];
}

Tensor Tensor::clone() const {
  return Tensor(storage_->shape, storage_->values);
}

void Tape::record(std::function<void()> backward_fn) { ops_.push_back(std::move(backward_fn)); }

void Tape::backward(const Tensor& loss) {
  if (loss.size() != 1) {
    throw DimensionError("backward() needs a single-valued loss, got " +
                         shape_string(loss.shape()));
  }
  const double one = 1.0;
  const_cast<Tensor&>(loss).accumulate_grad(std::span<const double>(&one, 1));
  for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) (*it)();
  ops_.clear();
}

Tape* active_tape() { return g_active_tape; }

TapeScope::TapeScope(Tape& tape) : previous_(g_active_tape) { g_active_tape = &tape; }
TapeScope::~TapeScope() { g_active_tape = previous_; }

NoGradScope::NoGradScope() : previous_(g_active_tape) { g_active_tape = nullptr; }
NoGradScope::~NoGradScope() { g_active_tape = previous_; }

bool should_record(std::initializer_list<const Tensor*> inputs) {
  if (g_active_tape == nullptr) return false;
  for (const auto* t : inputs) {
    if (t != nullptr && t->defined() && t->requires_grad()) return true;
  }
  return false;
}

Mask Mask::all(Shape shape) {
  auto n = shape_size(shape);
  return Mask{std::move(shape), std::vector<unsigned char>(n, 1)};
}

Mask Mask::row(std::vector<bool> keep) {
  Mask m{{1, keep.size()}, {}};
  m.keep.reserve(keep.size());
  for (bool k : keep) m.keep.push_back(k ? 1 : 0);
  return m;
}

}  // namespace navlab
