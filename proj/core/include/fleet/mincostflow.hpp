#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "fleet/matrix.hpp"

namespace fleet {

/// Bipartite shipment problem: integral supplies, integral demands, nonnegative
/// integer unit costs. The station maps record which network station each
/// source/sink stands for when the instance comes from a rebalancing epoch.
struct TransportationInstance {
  std::vector<std::int64_t> supplies;
  std::vector<std::int64_t> demands;
  Matrix<std::int64_t> cost;  // supplies.size() x demands.size()
  std::vector<std::size_t> source_station;
  std::vector<std::size_t> sink_station;

  void validate() const;
};

struct FlowSolution {
  Matrix<std::int64_t> flow;
  std::int64_t total_cost = 0;
  std::int64_t shipped = 0;
};

/// Min-cost flow of min(sum supplies, sum demands) units via successive
/// shortest paths with node potentials. Shortest-path ties go to the lowest
/// node index, so the returned flow is deterministic.
FlowSolution solve_transportation(const TransportationInstance& instance);

/// Sources carry min(cap_i, v_i - v^d_i) where positive, sinks carry
/// v^d_i - v_i where positive (v = `position`), unit costs are the travel
/// times between them.
TransportationInstance build_rebalance_instance(std::span<const int> position,
                                                std::span<const int> v_desired,
                                                std::span<const int> caps,
                                                const Matrix<int>& travel_time);

void to_json(nlohmann::json& j, const TransportationInstance& instance);
void to_json(nlohmann::json& j, const FlowSolution& solution);

}  // namespace fleet
