#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "attrinfer/dense_matrix.hpp"

namespace attrinfer {

struct ParamCheck {
  std::string name;
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
  double analytic_at_worst = 0.0;
  double numeric_at_worst = 0.0;
  std::size_t skipped = 0;  // entries where both gradients are below the floor
  bool passed = true;
};

struct GradCheckReport {
  std::vector<ParamCheck> params;
  double max_relative_error = 0.0;
  bool passed = true;
};

struct GradCheckOptions {
  double relative_tolerance = 1e-4;
  double step = 1e-5;
  // Entries where |analytic| and |numeric| are both below this are skipped.
  double floor = 1e-8;
};

// Compares an analytic gradient against central finite differences, one scalar
// at a time. `loss` must be deterministic in the current parameter values (any
// noise frozen). `gradient` returns one tensor per entry of `params`. Throws
// NumericalError naming the parameter if the loss turns non-finite.
GradCheckReport grad_check(const std::function<double()>& loss,
                           const std::function<std::vector<DenseMatrix>()>& gradient,
                           std::span<DenseMatrix* const> params,
                           std::span<const std::string> names, const GradCheckOptions& options = {});

}  // namespace attrinfer
