#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "fleet/matrix.hpp"
#include "fleet/rng.hpp"

namespace fleet {

struct FleetState;
struct Network;
struct SimConfig;

// One empty-vehicle movement request y_ij.
struct Dispatch {
  std::size_t origin = 0;
  std::size_t destination = 0;
  int count = 0;

  friend bool operator==(const Dispatch&, const Dispatch&) = default;
};

struct PolicyDecision {
  std::vector<Dispatch> dispatches;

  bool empty() const noexcept { return dispatches.empty(); }
  int total() const noexcept;
};

// Per-station destination choice; dest[i] == i holds the surplus in place.
struct RebalanceAction {
  std::vector<std::size_t> dest;
};

struct DecisionContext {
  const FleetState& state;
  const Network& network;
  const SimConfig& config;
  Rng& rng;
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string_view name() const = 0;
  virtual PolicyDecision decide(const DecisionContext& ctx) const = 0;
};

// Dense y matrix. Rejects self-loops, nonpositive counts and bad indices;
// repeated (origin, destination) entries accumulate.
Matrix<int> to_dispatch_matrix(const PolicyDecision& decision, std::size_t n);
PolicyDecision from_dispatch_matrix(const Matrix<int>& y);

}  // namespace fleet
