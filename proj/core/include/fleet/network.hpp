#pragma once

#include <cstddef>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "fleet/matrix.hpp"

namespace fleet {

// Interarrival value meaning "no demand on this pair" (rate 0).
inline constexpr double kNoDemand = std::numeric_limits<double>::infinity();

/// City graph: distances in miles, integer travel times in seconds and the
/// k-nearest neighbour sets used to restrict rebalancing destinations.
///
/// Immutable once built; share it freely between episode samplers.
struct Network {
  std::vector<std::string> labels;
  Matrix<double> distance;
  double speed_mph = 0.0;
  Matrix<int> travel_time;
  int t_max = 0;
  std::vector<std::vector<std::size_t>> neighbors;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t k() const noexcept {
    return neighbors.empty() ? 0 : neighbors.front().size();
  }
};

/// Poisson arrival rates in passengers per second, lambda(i, i) == 0.
struct DemandModel {
  Matrix<double> rate;
  Matrix<double> mean_trip_time;  // optional, reporting only

  std::size_t size() const noexcept { return rate.rows(); }
  double total_rate() const;
};

/// Travel times are round-half-up of d / speed in seconds, floored at one
/// second for distinct stations so every trip lands strictly in the future.
/// Labels default to "0".."n-1".
Network build_network(const Matrix<double>& distance, double speed_mph,
                      std::size_t k, std::vector<std::string> labels = {});

std::span<const std::size_t> k_nearest(const Network& network, std::size_t i);

/// lambda = 1 / mean interarrival; kNoDemand (or NaN) maps to 0 and the
/// diagonal is forced to 0.
DemandModel demand_from_interarrival(const Matrix<double>& mean_interarrival);

// CSV matrices: header row of station labels, first column of labels.
struct LabeledMatrix {
  std::vector<std::string> labels;
  Matrix<double> values;
};

LabeledMatrix read_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(const std::filesystem::path& path,
                      std::span<const std::string> labels,
                      const Matrix<double>& values);

}  // namespace fleet
