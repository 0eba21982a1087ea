#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "fleet/error.hpp"
#include "fleet/mincostflow.hpp"
#include "oracles.hpp"

namespace fleet {
namespace {

TransportationInstance instance(std::vector<std::int64_t> s, std::vector<std::int64_t> d,
                                std::vector<std::vector<std::int64_t>> c) {
  TransportationInstance inst;
  inst.supplies = std::move(s);
  inst.demands = std::move(d);
  inst.cost = Matrix<std::int64_t>(inst.supplies.size(), inst.demands.size(), 0);
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (std::size_t j = 0; j < c[i].size(); ++j) inst.cost(i, j) = c[i][j];
  }
  return inst;
}

TEST(Transport, SinglePair) {
  const FlowSolution sol = solve_transportation(instance({1}, {1}, {{5}}));
  EXPECT_EQ(sol.flow(0, 0), 1);
  EXPECT_EQ(sol.total_cost, 5);
}

TEST(Transport, OnlyFeasibleRouting) {
  const FlowSolution sol = solve_transportation(instance({2, 0}, {0, 2}, {{0, 3}, {1, 0}}));
  EXPECT_EQ(sol.flow(0, 1), 2);
  EXPECT_EQ(sol.total_cost, 6);
}

TEST(Transport, TwoByTwoOptimum) {
  // s1->t2 x2 at 1 plus s2->t1 x1 at 2 costs 4.
  const TransportationInstance inst = instance({2, 1}, {1, 2}, {{4, 1}, {2, 3}});
  const FlowSolution sol = solve_transportation(inst);
  EXPECT_EQ(sol.flow(0, 1), 2);
  EXPECT_EQ(sol.flow(1, 0), 1);
  EXPECT_EQ(sol.total_cost, 4);
  EXPECT_EQ(sol.total_cost, testing::brute_force_transport_cost(inst.supplies, inst.demands, inst.cost));
}

TEST(Transport, UnbalancedShipsTheSmallerSide) {
  const FlowSolution sol = solve_transportation(instance({5, 5}, {3}, {{2}, {1}}));
  EXPECT_EQ(sol.shipped, 3);
  EXPECT_EQ(sol.flow(1, 0), 3);
  EXPECT_EQ(sol.total_cost, 3);
}

TEST(Transport, MatchesEnumerationOnRandomInstances) {
  Rng rng(17);
  std::uniform_int_distribution<int> dim(1, 4);
  std::uniform_int_distribution<std::int64_t> amount(0, 5);
  std::uniform_int_distribution<std::int64_t> price(0, 9);
  for (int trial = 0; trial < 300; ++trial) {
    TransportationInstance inst;
    inst.supplies.resize(static_cast<std::size_t>(dim(rng)));
    inst.demands.resize(static_cast<std::size_t>(dim(rng)));
    for (auto& s : inst.supplies) s = amount(rng);
    for (auto& d : inst.demands) d = amount(rng);
    inst.cost = Matrix<std::int64_t>(inst.supplies.size(), inst.demands.size());
    for (auto& c : inst.cost.values()) c = price(rng);
    const FlowSolution sol = solve_transportation(inst);
    EXPECT_EQ(sol.total_cost, testing::brute_force_transport_cost(inst.supplies, inst.demands, inst.cost))
        << "trial " << trial;
    for (std::size_t i = 0; i < inst.supplies.size(); ++i) {
      std::int64_t out = 0;
      for (std::size_t j = 0; j < inst.demands.size(); ++j) out += sol.flow(i, j);
      EXPECT_LE(out, inst.supplies[i]);
    }
  }
}

TEST(Transport, RejectsNegativeInput) {
  EXPECT_THROW(solve_transportation(instance({-1}, {1}, {{1}})), Error);
  EXPECT_THROW(solve_transportation(instance({1}, {1}, {{-1}})), Error);
  TransportationInstance bad = instance({1}, {1}, {{1}});
  bad.cost = Matrix<std::int64_t>(2, 1, 1);
  EXPECT_THROW(solve_transportation(bad), Error);
}

TEST(RebalanceInstance, Construction) {
  Matrix<int> t(2, 2, 0);
  t(0, 1) = t(1, 0) = 7;
  const std::vector<int> v{4, 0}, vd{2, 2}, caps{4, 0};
  const TransportationInstance inst = build_rebalance_instance(v, vd, caps, t);
  EXPECT_EQ(inst.supplies, (std::vector<std::int64_t>{2}));
  EXPECT_EQ(inst.demands, (std::vector<std::int64_t>{2}));
  EXPECT_EQ(inst.source_station, (std::vector<std::size_t>{0}));
  EXPECT_EQ(inst.sink_station, (std::vector<std::size_t>{1}));
  EXPECT_EQ(inst.cost(0, 0), 7);
}

TEST(RebalanceInstance, BalancedIsEmpty) {
  const Matrix<int> t(2, 2, 1);
  const std::vector<int> v{2, 2};
  const TransportationInstance inst = build_rebalance_instance(v, v, v, t);
  EXPECT_TRUE(inst.supplies.empty());
  EXPECT_TRUE(inst.demands.empty());
}

TEST(RebalanceInstance, CapClipsSupply) {
  const Matrix<int> t(2, 2, 1);
  const std::vector<int> v{6, 0}, vd{1, 3}, caps{2, 0};
  EXPECT_EQ(build_rebalance_instance(v, vd, caps, t).supplies, (std::vector<std::int64_t>{2}));
}

TEST(RebalanceInstance, JsonCarriesFields) {
  const TransportationInstance inst = instance({2}, {2}, {{3}});
  nlohmann::json j = inst;
  EXPECT_EQ(j["supplies"], nlohmann::json::array({2}));
  nlohmann::json s = solve_transportation(inst);
  EXPECT_EQ(s["total_cost"], 6);
}

}  // namespace
}  // namespace fleet
