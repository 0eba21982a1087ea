#include <gtest/gtest.h>

#include <numeric>

#include "fleet/error.hpp"
#include "fleet/policy.hpp"
#include "oracles.hpp"

namespace fleet {
namespace {

// Star: station 0 in the middle, leaves at the given distances (miles).
// Leaf-to-leaf distances are large so every leaf's nearest station is 0.
Network star(std::vector<double> leaf_distance, std::size_t k) {
  const std::size_t n = leaf_distance.size() + 1;
  Matrix<double> d(n, n, 0.0);
  for (std::size_t j = 1; j < n; ++j) {
    d(0, j) = d(j, 0) = leaf_distance[j - 1];
    for (std::size_t l = 1; l < n; ++l) {
      if (l != j) d(j, l) = 50.0 + static_cast<double>(j + l);
    }
  }
  return build_network(d, 10.0, k);
}

FleetState make_state(std::vector<int> idle, std::vector<int> queue) {
  const int m = std::accumulate(idle.begin(), idle.end(), 0);
  FleetState s = FleetState::initial(idle.size(), m);
  s.idle = std::move(idle);
  for (std::size_t i = 0; i < queue.size(); ++i) {
    for (int c = 0; c < queue[i]; ++c) s.queues[i].push_back({i, 0, 0});
  }
  return s;
}

Matrix<int> as_matrix(const PolicyDecision& d, std::size_t n) { return to_dispatch_matrix(d, n); }

TEST(MaxWeight, TakesFromRichestNeighbour) {
  const Network net = star({1.0, 1.1, 1.2}, 3);
  const FleetState s = make_state({0, 3, 1, 2}, {1, 0, 0, 0});
  const PolicyDecision d = maxweight_decide(s, net);
  ASSERT_EQ(d.dispatches.size(), 1u);
  EXPECT_EQ(d.dispatches[0], (Dispatch{1, 0, 1}));
}

TEST(MaxWeight, SequentialDecrementSpreadsLoad) {
  const Network net = star({1.0, 1.1, 1.2}, 3);
  const FleetState s = make_state({0, 1, 1, 0}, {2, 0, 0, 0});
  const Matrix<int> y = as_matrix(maxweight_decide(s, net), 4);
  EXPECT_EQ(y(1, 0), 1);
  EXPECT_EQ(y(2, 0), 1);
  EXPECT_EQ(y(3, 0), 0);
}

TEST(MaxWeight, NothingToTake) {
  const Network net = star({1.0, 1.1, 1.2}, 3);
  EXPECT_TRUE(maxweight_decide(make_state({0, 0, 0, 0}, {4, 0, 0, 0}), net).empty());
}

TEST(MaxWeight, InboundEmptiesCountAgainstDeficit) {
  const Network net = star({1.0, 1.1, 1.2}, 3);
  FleetState s = make_state({0, 3, 1, 2}, {1, 0, 0, 0});
  s.fleet_size += 1;
  s.schedule(50, 0, 1, TripKind::kEmpty);
  EXPECT_TRUE(maxweight_decide(s, net).empty());
  EXPECT_EQ(inbound_empty(s)[0], 1);
}

TEST(BackPressure, NegativeScoreBlocksDispatch) {
  const Network net = star({0.74}, 1);
  const FleetState s = make_state({0, 5}, {1, 0});
  EXPECT_TRUE(backpressure_decide(s, net, {0.1}).empty());
}

TEST(BackPressure, HighestScoreWins) {
  const Network net = star({0.74, 0.18}, 2);
  const FleetState s = make_state({0, 5, 2}, {1, 0, 0});
  const PolicyDecision d = backpressure_decide(s, net, {1.0});
  ASSERT_EQ(d.dispatches.size(), 1u);
  EXPECT_EQ(d.dispatches[0], (Dispatch{1, 0, 1}));
}

TEST(BackPressure, RejectsNonPositiveSlope) { EXPECT_THROW(BackPressurePolicy({0.0}), Error); }

TEST(Proportional, ExactSplit) {
  const Network net = star({1.0, 1.1}, 2);
  const Matrix<int> y = as_matrix(proportional_decide(make_state({4, 0, 0}, {0, 2, 2}), net), 3);
  EXPECT_EQ(y(0, 1), 2);
  EXPECT_EQ(y(0, 2), 2);
}

TEST(Proportional, LargestRemainder) {
  const Network net = star({1.0, 1.1}, 2);
  const Matrix<int> y = as_matrix(proportional_decide(make_state({5, 0, 0}, {0, 2, 1}), net), 3);
  EXPECT_EQ(y(0, 1), 3);
  EXPECT_EQ(y(0, 2), 2);
}

TEST(Proportional, NoQueuesNoDispatch) {
  const Network net = star({1.0, 1.1}, 2);
  EXPECT_TRUE(proportional_decide(make_state({5, 0, 0}, {0, 0, 0}), net).empty());
}

TEST(Proportional, MatchesApportionmentOracle) {
  Rng rng(21);
  std::uniform_int_distribution<int> small(0, 6);
  const Network net = star({1.0, 1.1, 1.2, 1.3}, 4);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<int> queue{0, small(rng), small(rng), small(rng), small(rng)};
    const int surplus = small(rng) * 3;
    const FleetState s = make_state({surplus, 0, 0, 0, 0}, queue);
    const Matrix<int> y = as_matrix(proportional_decide(s, net), 5);
    const auto nb = k_nearest(net, 0);
    std::vector<int> weights;
    for (std::size_t j : nb) weights.push_back(queue[j]);
    const std::vector<int> expect = testing::largest_remainder(surplus, weights);
    for (std::size_t q = 0; q < nb.size(); ++q) EXPECT_EQ(y(0, nb[q]), expect[q]) << "trial " << trial;
  }
}

Network timed(const Matrix<int>& seconds) {
  Matrix<double> d(seconds.rows(), seconds.cols(), 0.0);
  for (std::size_t i = 0; i < d.rows(); ++i) {
    for (std::size_t j = 0; j < d.cols(); ++j) d(i, j) = seconds(i, j) * 10.0 / 3600.0;
  }
  return build_network(d, 10.0, d.rows() - 1);
}

TEST(CostSensitive, TwoStationEvenSplit) {
  Matrix<int> t(2, 2, 0);
  t(0, 1) = t(1, 0) = 5;
  const Network net = timed(t);
  CostSensitiveTrace trace;
  const PolicyDecision d = costsensitive_decide(make_state({4, 0}, {0, 0}), net, &trace);
  EXPECT_EQ(trace.v_desired, 2);
  EXPECT_EQ(trace.solution.total_cost, 10);
  ASSERT_EQ(d.dispatches.size(), 1u);
  EXPECT_EQ(d.dispatches[0], (Dispatch{0, 1, 2}));
}

TEST(CostSensitive, SingleHopOptimum) {
  Matrix<int> t(3, 3, 0);
  t(0, 1) = t(1, 0) = 1;
  t(0, 2) = t(2, 0) = 4;
  t(1, 2) = t(2, 1) = 1;
  const Network net = timed(t);
  CostSensitiveTrace trace;
  const Matrix<int> y = as_matrix(costsensitive_decide(make_state({6, 0, 0}, {0, 0, 0}), net, &trace), 3);
  EXPECT_EQ(y(0, 1), 2);
  EXPECT_EQ(y(0, 2), 2);
  EXPECT_EQ(trace.solution.total_cost, 10);
}

TEST(CostSensitive, BalancedStateStaysPut) {
  const Network net = testing::line_network(4, 0.5, 3);
  EXPECT_TRUE(costsensitive_decide(make_state({3, 3, 4, 3}, {1, 0, 0, 1}), net).empty());
}

TEST(CostSensitive, RandomStatesRespectSurplusAndReachTargets) {
  const Network net = testing::line_network(6, 0.4, 5);
  Rng rng(4);
  std::uniform_int_distribution<int> draw(0, 12);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<int> idle(6), queue(6);
    for (auto& v : idle) v = draw(rng);
    for (auto& p : queue) p = draw(rng) / 3;
    FleetState s = make_state(idle, queue);
    CostSensitiveTrace trace;
    const Matrix<int> y = as_matrix(costsensitive_decide(s, net, &trace), 6);
    ASSERT_NO_THROW(apply_dispatches(s, net, y));
    EXPECT_FALSE(trace.fallback);
  }
}

TEST(NoRebalance, AlwaysEmpty) {
  EXPECT_TRUE(no_rebalance_decide(make_state({9, 0}, {0, 9})).empty());
}

TEST(Policies, RandomStatesNeverOverdraw) {
  const Network net = testing::line_network(6, 0.4, 3);
  Rng rng(9);
  std::uniform_int_distribution<int> draw(0, 10);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<int> idle(6), queue(6);
    for (auto& v : idle) v = draw(rng);
    for (auto& p : queue) p = draw(rng);
    const FleetState base = make_state(idle, queue);
    for (const PolicyDecision& d :
         {maxweight_decide(base, net), backpressure_decide(base, net, {0.5}),
          proportional_decide(base, net), costsensitive_decide(base, net)}) {
      FleetState s = base;
      ASSERT_NO_THROW(apply_dispatches(s, net, to_dispatch_matrix(d, 6)));
      EXPECT_TRUE(s.conserved());
    }
  }
}

}  // namespace
}  // namespace fleet
