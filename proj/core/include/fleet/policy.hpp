#pragma once

#include <functional>
#include <memory>
#include <string>
#include <string_view>

#include "fleet/decision.hpp"
#include "fleet/mincostflow.hpp"
#include "fleet/network.hpp"
#include "fleet/sim.hpp"

namespace fleet {

struct BackpressureScoreConfig {
  double c = 0.1;  // miles per surplus vehicle, f(v) = c * v
};

// Empty vehicles already heading to each station.
std::vector<int> inbound_empty(const FleetState& state);

/// Serves each station's outstanding deficit (queue minus idle minus empty
/// vehicles already inbound) one vehicle at a time from the neighbour with the
/// most surplus. Stations in ascending index, argmax ties to the lower index.
PolicyDecision maxweight_decide(const FleetState& state, const Network& network);

/// Same deficit loop, source = argmax over neighbours of c * surplus_j - d_ji,
/// dispatching only while that score is positive.
PolicyDecision backpressure_decide(const FleetState& state, const Network& network,
                                   const BackpressureScoreConfig& cfg);

/// Splits each station's surplus over its neighbours in proportion to their
/// queue lengths (floor + largest remainder, ties to the lower index).
PolicyDecision proportional_decide(const FleetState& state, const Network& network);

struct CostSensitiveTrace {
  int v_desired = 0;
  TransportationInstance instance;
  FlowSolution solution;
  bool fallback = false;  // targets unreachable; max shippable flow returned
};

/// Spreads idle vehicles evenly: moves surplus so every station holds
/// v^d = floor((M - sum_i max(p_i - v_i, 0)) / n) idle vehicles, at least
/// total travel time, over the full graph. M counts idle vehicles only, which
/// keeps the targets reachable.
PolicyDecision costsensitive_decide(const FleetState& state, const Network& network,
                                    CostSensitiveTrace* trace = nullptr);

PolicyDecision no_rebalance_decide(const FleetState& state);

class NoRebalancePolicy final : public Policy {
 public:
  std::string_view name() const override { return "none"; }
  PolicyDecision decide(const DecisionContext& ctx) const override {
    return no_rebalance_decide(ctx.state);
  }
};

class MaxWeightPolicy final : public Policy {
 public:
  std::string_view name() const override { return "maxweight"; }
  PolicyDecision decide(const DecisionContext& ctx) const override {
    return maxweight_decide(ctx.state, ctx.network);
  }
};

class BackPressurePolicy final : public Policy {
 public:
  explicit BackPressurePolicy(BackpressureScoreConfig cfg = {});
  std::string_view name() const override { return "backpressure"; }
  PolicyDecision decide(const DecisionContext& ctx) const override {
    return backpressure_decide(ctx.state, ctx.network, cfg_);
  }

 private:
  BackpressureScoreConfig cfg_;
};

class ProportionalPolicy final : public Policy {
 public:
  std::string_view name() const override { return "proportional"; }
  PolicyDecision decide(const DecisionContext& ctx) const override {
    return proportional_decide(ctx.state, ctx.network);
  }
};

class CostSensitivePolicy final : public Policy {
 public:
  // The observer sees every solved instance; it must be safe to call from
  // whichever thread runs the episode.
  using Observer = std::function<void(const CostSensitiveTrace&)>;

  explicit CostSensitivePolicy(Observer observer = {}) : observer_(std::move(observer)) {}
  std::string_view name() const override { return "costsensitive"; }
  PolicyDecision decide(const DecisionContext& ctx) const override;

 private:
  Observer observer_;
};

}  // namespace fleet
