#include "fleet/gae.hpp"

#include "fleet/error.hpp"

namespace fleet {

GaeResult gae_advantages(std::span<const double> rewards, std::span<const double> values,
                         double bootstrap, double gamma, double lambda) {
  require(rewards.size() == values.size(), "rewards and values must have equal length");
  const std::size_t n = rewards.size();
  GaeResult out;
  out.advantages.resize(n);
  out.returns.resize(n);
  double running = 0.0;
  double next_value = bootstrap;
  for (std::size_t t = n; t-- > 0;) {
    const double delta = rewards[t] + gamma * next_value - values[t];
    running = delta + gamma * lambda * running;
    out.advantages[t] = running;
    out.returns[t] = running + values[t];
    next_value = values[t];
  }
  return out;
}

}  // namespace fleet
