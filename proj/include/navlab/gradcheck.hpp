#pragma once

#include <functional>
#include <string>

#include "navlab/nn.hpp"

namespace navlab {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t coordinates = 0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
};

/// Compares tape gradients of a scalar function against central differences
/// over every coordinate of `params`. The error per coordinate is
/// |analytic − numeric| / max(1, |analytic|). Throws EvaluationError when f
/// produces a non-finite value.
GradCheckResult grad_check(const std::function<Tensor()>& f, const nn::ParameterList& params,
                           double h = 1e-5);

}  // namespace navlab
