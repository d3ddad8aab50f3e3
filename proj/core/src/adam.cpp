#include "attrinfer/adam.hpp"

#include <cmath>
#include <string>

#include "attrinfer/error.hpp"

namespace attrinfer {

AdamState::AdamState(AdamConfig config, std::span<const DenseMatrix* const> params)
    : config_(config) {
  if (!(config.learning_rate > 0.0)) throw ConfigError("Adam learning rate must be positive");
  first_.reserve(params.size());
  second_.reserve(params.size());
  for (const DenseMatrix* p : params) {
    first_.emplace_back(p->rows(), p->cols());
    second_.emplace_back(p->rows(), p->cols());
  }
}

void adam_step(std::span<DenseMatrix* const> params, std::span<const DenseMatrix> grads,
               AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.first_.size()) {
    throw DimensionError("adam_step: " + std::to_string(params.size()) + " parameters, " +
                         std::to_string(grads.size()) + " gradients, " +
                         std::to_string(state.first_.size()) + " moment slots");
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (!params[k]->same_shape(grads[k]) || !params[k]->same_shape(state.first_[k])) {
      throw DimensionError("adam_step: tensor " + std::to_string(k) + " has parameter shape " +
                           params[k]->shape_string() + ", gradient shape " +
                           grads[k].shape_string() + ", moment shape " +
                           state.first_[k].shape_string());
    }
  }

  const AdamConfig& cfg = state.config_;
  ++state.step_;
  const double t = static_cast<double>(state.step_);
  const double first_correction = 1.0 - std::pow(cfg.beta1, t);
  const double second_correction = 1.0 - std::pow(cfg.beta2, t);

  for (std::size_t k = 0; k < params.size(); ++k) {
    auto p = params[k]->values();
    auto g = grads[k].values();
    auto m = state.first_[k].values();
    auto v = state.second_[k].values();
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double m_hat = m[i] / first_correction;
      const double v_hat = v[i] / second_correction;
      p[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
  }
}

}  // namespace attrinfer
