#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "attrinfer/dense_matrix.hpp"

namespace attrinfer {

struct AdamConfig {
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Moment accumulators for one group of parameter tensors.
class AdamState {
 public:
  AdamState() = default;
  AdamState(AdamConfig config, std::span<const DenseMatrix* const> params);

  const AdamConfig& config() const noexcept { return config_; }
  std::uint64_t step_count() const noexcept { return step_; }
  std::span<const DenseMatrix> first_moments() const noexcept { return first_; }
  std::span<const DenseMatrix> second_moments() const noexcept { return second_; }

 private:
  friend void adam_step(std::span<DenseMatrix* const> params,
                        std::span<const DenseMatrix> grads, AdamState& state);

  AdamConfig config_;
  std::uint64_t step_ = 0;
  std::vector<DenseMatrix> first_;
  std::vector<DenseMatrix> second_;
};

// One bias-corrected Adam update of every tensor in `params`. Throws
// DimensionError when params, grads and moments disagree in count or shape.
void adam_step(std::span<DenseMatrix* const> params, std::span<const DenseMatrix> grads,
               AdamState& state);

}  // namespace attrinfer
