#include "attrinfer/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "attrinfer/error.hpp"

namespace attrinfer {

GradCheckReport grad_check(const std::function<double()>& loss,
                           const std::function<std::vector<DenseMatrix>()>& gradient,
                           std::span<DenseMatrix* const> params,
                           std::span<const std::string> names, const GradCheckOptions& options) {
  if (names.size() != params.size()) {
    throw DimensionError("grad_check: " + std::to_string(params.size()) + " parameters but " +
                         std::to_string(names.size()) + " names");
  }
  const std::vector<DenseMatrix> analytic = gradient();
  if (analytic.size() != params.size()) {
    throw DimensionError("grad_check: gradient returned " + std::to_string(analytic.size()) +
                         " tensors for " + std::to_string(params.size()) + " parameters");
  }

  GradCheckReport report;
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (!analytic[k].same_shape(*params[k])) {
      throw DimensionError("grad_check: gradient of " + names[k] + " has shape " +
                           analytic[k].shape_string() + ", parameter has " +
                           params[k]->shape_string());
    }
    ParamCheck check;
    check.name = names[k];
    auto values = params[k]->values();
    auto grad = analytic[k].values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + options.step;
      const double up = loss();
      values[i] = saved - options.step;
      const double down = loss();
      values[i] = saved;
      if (!std::isfinite(up) || !std::isfinite(down)) {
        throw NumericalError("grad_check: non-finite loss while perturbing " + names[k] + "[" +
                             std::to_string(i) + "]");
      }
      const double numeric = (up - down) / (2.0 * options.step);
      const double scale = std::max(std::abs(grad[i]), std::abs(numeric));
      if (scale < options.floor) {
        ++check.skipped;
        continue;
      }
      const double rel = std::abs(grad[i] - numeric) / scale;
      if (rel > check.max_relative_error) {
        check.max_relative_error = rel;
        check.worst_index = i;
        check.analytic_at_worst = grad[i];
        check.numeric_at_worst = numeric;
      }
    }
    check.passed = check.max_relative_error <= options.relative_tolerance;
    report.max_relative_error = std::max(report.max_relative_error, check.max_relative_error);
    report.passed = report.passed && check.passed;
    report.params.push_back(std::move(check));
  }
  return report;
}

}  // namespace attrinfer
