#pragma once

#include <span>
#include <vector>

namespace fleet {

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;  // advantage + value, the critic's target
};

/// Generalized advantage estimation over one trajectory segment.
/// delta_t = r_t + gamma * V_{t+1} - V_t, with V_T = `bootstrap`;
/// A_t = sum_l (gamma * lambda)^l delta_{t+l}.
GaeResult gae_advantages(std::span<const double> rewards,
                         std::span<const double> values, double bootstrap,
                         double gamma, double lambda);

}  // namespace fleet
