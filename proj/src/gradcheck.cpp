#include "navlab/gradcheck.hpp"

#include <cmath>

#include "navlab/error.hpp"

namespace navlab {

namespace {

double evaluate(const std::function<Tensor()>& f) {
  NoGradScope no_grad;
  const double v = f().item();
  if (!std::isfinite(v)) throw EvaluationError("grad_check: function value is not finite");
  return v;
}

}  // namespace

GradCheckResult grad_check(const std::function<Tensor()>& f, const nn::ParameterList& params,
                           double h) {
  std::vector<bool> was_trainable;
  for (const auto& p : params) was_trainable.push_back(p.tensor.requires_grad());
  nn::set_trainable(params, true);
  nn::zero_grad(params);

  std::vector<std::vector<double>> analytic;
  {
    Tape tape;
    TapeScope scope(tape);
    Tensor loss = f();
    if (!std::isfinite(loss.item())) throw EvaluationError("grad_check: function value is not finite");
    tape.backward(loss);
  }
  for (const auto& p : params) {
    if (p.tensor.has_grad()) analytic.emplace_back(p.tensor.grad().begin(), p.tensor.grad().end());
    else analytic.emplace_back(p.tensor.size(), 0.0);
  }

  GradCheckResult result;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Tensor t = params[pi].tensor;
    auto values = t.mutable_values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double original = values[i];
      values[i] = original + h;
      const double up = evaluate(f);
      values[i] = original - h;
      const double down = evaluate(f);
      values[i] = original;
      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic[pi][i];
      const double err = std::abs(a - numeric) / std::max(1.0, std::abs(a));
      ++result.coordinates;
      if (err > result.max_rel_error) {
        result.max_rel_error = err;
        result.worst_parameter = params[pi].name;
        result.worst_index = i;
      }
    }
  }

  nn::zero_grad(params);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const_cast<Tensor&>(params[i].tensor).set_requires_grad(was_trainable[i]);
  }
  return result;
}

}  // namespace navlab
