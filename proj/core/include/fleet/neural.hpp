#pragma once

#include <span>
#include <vector>

#include "fleet/decision.hpp"
#include "fleet/mlp.hpp"
#include "fleet/network.hpp"
#include "fleet/sim.hpp"

namespace fleet {

/// Action head for the rebalancing policy. The policy network emits one score
/// per station; station i picks its destination from {i} + neighbors(i) with
/// probabilities softmax(scores restricted to those options). Stations choose
/// independently, so the joint log-prob is the per-station sum.
class NeighborhoodHead {
 public:
  explicit NeighborhoodHead(const Network& network);

  std::size_t stations() const noexcept { return options_.size(); }
  std::size_t option_count() const noexcept { return options_.empty() ? 0 : options_.front().size(); }
  // Station i first ("hold"), then its neighbours nearest-first.
  std::span<const std::size_t> options(std::size_t i) const { return options_[i]; }

  void log_probs(std::span<const double> scores, std::size_t i, std::span<double> out) const;
  double log_prob(std::span<const double> scores, std::size_t i, std::size_t dest) const;
  double joint_log_prob(std::span<const double> scores, std::span<const std::size_t> dest) const;

  // grad += weight * d joint_log_prob / d scores.
  void add_joint_log_prob_grad(std::span<const double> scores, std::span<const std::size_t> dest,
                               double weight, std::span<double> grad) const;

  // sum_i KL(p_i(old) || p_i(new)).
  double kl(std::span<const double> old_scores, std::span<const double> new_scores) const;

 private:
  std::vector<std::vector<std::size_t>> options_;
};

enum class DecodeMode { kSample, kGreedy };

struct NeuralDecision {
  RebalanceAction action;
  std::vector<double> log_probs;  // per station, of the chosen destination
  std::vector<double> scores;     // raw network output

  double joint_log_prob() const;
};

NeuralDecision neural_decide(const FleetState& state, const Network& network,
                             const Mlp& policy_net, DecodeMode mode, Rng& rng);

class NeuralPolicy final : public Policy {
 public:
  NeuralPolicy(Mlp net, DecodeMode mode) : net_(std::move(net)), mode_(mode) {}
  std::string_view name() const override { return "ppo"; }
  PolicyDecision decide(const DecisionContext& ctx) const override;

  const Mlp& net() const noexcept { return net_; }

 private:
  Mlp net_;
  DecodeMode mode_;
};

}  // namespace fleet
