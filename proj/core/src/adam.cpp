#include "fleet/adam.hpp"

#include <cmath>

#include "fleet/error.hpp"

namespace fleet {

Adam::Adam(std::size_t parameter_count, AdamConfig config)
    : config_(config), m_(parameter_count, 0.0), v_(parameter_count, 0.0) {
  require(config.learning_rate >= 0.0, "learning rate must be nonnegative");
  require(config.beta1 >= 0.0 && config.beta1 < 1.0, "beta1 must lie in [0, 1)");
  require(config.beta2 >= 0.0 && config.beta2 < 1.0, "beta2 must lie in [0, 1)");
  require(config.epsilon > 0.0, "epsilon must be positive");
}

bool Adam::step(std::span<double> params, std::span<const double> grads) {
  require(params.size() == m_.size() && grads.size() == m_.size(),
          "Adam state does not match the parameter count");
  for (double g : grads) {
    if (!std::isfinite(g)) return false;
  }
  ++steps_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    m_[k] = b1 * m_[k] + (1.0 - b1) * grads[k];
    v_[k] = b2 * v_[k] + (1.0 - b2) * grads[k] * grads[k];
    const double m_hat = m_[k] / c1;
    const double v_hat = v_[k] / c2;
    params[k] -= config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
  }
  return true;
}

void Adam::restore(std::uint64_t steps, std::vector<double> m, std::vector<double> v) {
  require(m.size() == m_.size() && v.size() == v_.size(), "restored Adam moments have the wrong size");
  steps_ = steps;
  m_ = std::move(m);
  v_ = std::move(v);
}

}  // namespace fleet
