#include "fleet/policy.hpp"

#include <algorithm>
#include <numeric>

#include "fleet/error.hpp"

namespace fleet {

std::vector<int> inbound_empty(const FleetState& state) {
  std::vector<int> inbound(state.size(), 0);
  for (const auto& [tick, batch] : state.in_transit) {
    for (const auto& tr : batch) {
      if (tr.kind == TripKind::kEmpty) inbound[tr.destination] += tr.count;
    }
  }
  return inbound;
}

namespace {

class DispatchAccumulator {
 public:
  explicit DispatchAccumulator(std::size_t n) : y_(n, n, 0) {}
  void add(std::size_t from, std::size_t to, int count) { y_(from, to) += count; }
  PolicyDecision finish() const { return from_dispatch_matrix(y_); }

 private:
  Matrix<int> y_;
};

std::vector<int> surpluses(const FleetState& state) {
  std::vector<int> s(state.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = state.surplus(i);
  return s;
}

std::vector<int> outstanding_deficits(const FleetState& state) {
  const auto inbound = inbound_empty(state);
  std::vector<int> d(state.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = std::max(state.deficit(i) - inbound[i], 0);
  return d;
}

// Deficit-driven single-vehicle loop shared by MaxWeight and BackPressure.
// `pick` returns the chosen source for destination i or n for "none".
template <class Pick>
PolicyDecision serve_deficits(const FleetState& state, const Network& network, Pick pick) {
  const std::size_t n = state.size();
  std::vector<int> avail = surpluses(state);
  const std::vector<int> deficit = outstanding_deficits(state);
  DispatchAccumulator acc(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (int need = deficit[i]; need > 0; --need) {
      const std::size_t j = pick(i, network.neighbors[i], avail);
      if (j == n) break;
      --avail[j];
      acc.add(j, i, 1);
    }
  }
  return acc.finish();
}

}  // namespace

PolicyDecision maxweight_decide(const FleetState& state, const Network& network) {
  const std::size_t n = state.size();
  return serve_deficits(state, network, [n](std::size_t, std::span<const std::size_t> nb,
                                            const std::vector<int>& avail) {
    std::size_t best = n;
    for (std::size_t j : nb) {
      if (avail[j] <= 0) continue;
      if (best == n || avail[j] > avail[best] || (avail[j] == avail[best] && j < best)) best = j;
    }
    return best;
  });
}

PolicyDecision backpressure_decide(const FleetState& state, const Network& network,
                                   const BackpressureScoreConfig& cfg) {
  require(cfg.c > 0.0, "backpressure score slope must be positive");
  const std::size_t n = state.size();
  return serve_deficits(state, network, [&](std::size_t i, std::span<const std::size_t> nb,
                                            const std::vector<int>& avail) {
    std::size_t best = n;
    double best_score = 0.0;
    for (std::size_t j : nb) {
      if (avail[j] <= 0) continue;
      const double score = cfg.c * avail[j] - network.distance(j, i);
      if (best == n || score > best_score || (score == best_score && j < best)) {
        best = j;
        best_score = score;
      }
    }
    return best != n && best_score > 0.0 ? best : n;
  });
}

PolicyDecision proportional_decide(const FleetState& state, const Network& network) {
  const std::size_t n = state.size();
  DispatchAccumulator acc(n);
  for (std::size_t j = 0; j < n; ++j) {
    const long long s = state.surplus(j);
    if (s <= 0) continue;
    const auto& nb = network.neighbors[j];
    long long weight = 0;
    for (std::size_t i : nb) weight += state.queue_length(i);
    if (weight == 0) continue;

    struct Share {
      std::size_t station;
      long long base;
      long long remainder;
    };
    std::vector<Share> shares;
    long long assigned = 0;
    for (std::size_t i : nb) {
      const long long num = s * state.queue_length(i);
      shares.push_back({i, num / weight, num % weight});
      assigned += num / weight;
    }
    std::sort(shares.begin(), shares.end(), [](const Share& a, const Share& b) {
      return a.remainder != b.remainder ? a.remainder > b.remainder : a.station < b.station;
    });
    for (long long left = s - assigned, k = 0; left > 0; --left, ++k) ++shares[k].base;
    for (const auto& sh : shares) {
      if (sh.base > 0) acc.add(j, sh.station, static_cast<int>(sh.base));
    }
  }
  return acc.finish();
}

PolicyDecision costsensitive_decide(const FleetState& state, const Network& network,
                                    CostSensitiveTrace* trace) {
  const std::size_t n = state.size();
  long long unserved = 0;
  for (std::size_t i = 0; i < n; ++i) unserved += state.deficit(i);
  long long idle_total = 0;
  for (int v : state.idle) idle_total += v;
  const long long excess = idle_total - unserved;
  const int v_desired = excess > 0 ? static_cast<int>(excess / static_cast<long long>(n)) : 0;

  const std::vector<int> caps = surpluses(state);
  const std::vector<int> target(n, v_desired);
  TransportationInstance inst = build_rebalance_instance(state.idle, target, caps, network.travel_time);
  FlowSolution sol = solve_transportation(inst);

  DispatchAccumulator acc(n);
  for (std::size_t s = 0; s < inst.source_station.size(); ++s) {
    for (std::size_t d = 0; d < inst.sink_station.size(); ++d) {
      if (sol.flow(s, d) > 0) {
        acc.add(inst.source_station[s], inst.sink_station[d], static_cast<int>(sol.flow(s, d)));
      }
    }
  }
  if (trace) {
    const std::int64_t wanted = std::accumulate(inst.demands.begin(), inst.demands.end(), std::int64_t{0});
    trace->v_desired = v_desired;
    trace->fallback = sol.shipped < wanted;
    trace->instance = std::move(inst);
    trace->solution = std::move(sol);
  }
  return acc.finish();
}

PolicyDecision no_rebalance_decide(const FleetState&) { return {}; }

BackPressurePolicy::BackPressurePolicy(BackpressureScoreConfig cfg) : cfg_(cfg) {
  require(cfg_.c > 0.0, "backpressure score slope must be positive");
}

PolicyDecision CostSensitivePolicy::decide(const DecisionContext& ctx) const {
  if (!observer_) return costsensitive_decide(ctx.state, ctx.network);
  CostSensitiveTrace trace;
  PolicyDecision out = costsensitive_decide(ctx.state, ctx.network, &trace);
  observer_(trace);
  return out;
}

}  // namespace fleet
