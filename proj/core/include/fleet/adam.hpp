#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace fleet {

struct AdamConfig {
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Bias-corrected Adam, descent convention: params -= lr * m_hat / (sqrt(v_hat) + eps).
class Adam {
 public:
  Adam() = default;
  Adam(std::size_t parameter_count, AdamConfig config = {});

  // Returns false and leaves params and moments untouched when any gradient
  // entry is non-finite.
  bool step(std::span<double> params, std::span<const double> grads);

  const AdamConfig& config() const noexcept { return config_; }
  std::uint64_t steps() const noexcept { return steps_; }
  std::span<const double> first_moment() const noexcept { return m_; }
  std::span<const double> second_moment() const noexcept { return v_; }

  // Restores a checkpointed optimizer.
  void restore(std::uint64_t steps, std::vector<double> m, std::vector<double> v);

 private:
  AdamConfig config_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::uint64_t steps_ = 0;
};

}  // namespace fleet
