#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <span>
#include <vector>

#include "fleet/decision.hpp"
#include "fleet/matrix.hpp"
#include "fleet/network.hpp"
#include "fleet/rng.hpp"

namespace fleet {

struct Passenger {
  std::size_t origin = 0;
  std::size_t destination = 0;
  std::int64_t arrival_tick = 0;
};

enum class TripKind : std::uint8_t { kOccupied, kEmpty };

struct Transit {
  std::size_t destination = 0;
  int count = 0;
  TripKind kind = TripKind::kOccupied;
};

struct SimConfig {
  int rebalance_interval = 100;  // seconds (ticks)
  int episode_length = 36000;    // seconds (ticks)
  int fleet_size = 1000;
  double dpr = 1.0;
  double alpha = 10.0;
  std::uint64_t seed = 0;

  void validate() const;
  int decision_epochs() const { return episode_length / rebalance_interval; }
};

/// Closed-fleet state at one tick. `in_transit` maps a future arrival tick to
/// the vehicles landing then; it stands in for the departure histories.
struct FleetState {
  std::int64_t tick = 0;
  std::vector<std::deque<Passenger>> queues;
  std::vector<int> idle;
  std::map<std::int64_t, std::vector<Transit>> in_transit;
  int fleet_size = 0;

  // m / n vehicles per station, remainder to the lowest indices, no queues.
  static FleetState initial(std::size_t n, int fleet_size);

  std::size_t size() const noexcept { return idle.size(); }
  int queue_length(std::size_t i) const { return static_cast<int>(queues[i].size()); }
  int surplus(std::size_t i) const;
  int deficit(std::size_t i) const;
  long long in_transit_count() const;
  // Exactly fleet_size vehicles across idle + in transit, nothing negative,
  // nothing scheduled at or before the current tick.
  bool conserved() const;

  void schedule(std::int64_t arrival_tick, std::size_t destination, int count,
                TripKind kind);
};

struct ArrivalBatch {
  std::size_t origin = 0;
  std::size_t destination = 0;
  int count = 0;

  friend bool operator==(const ArrivalBatch&, const ArrivalBatch&) = default;
};

// Independent Poisson(lambda_ij * dt) count per OD pair with a positive rate,
// visited in row-major order so a seed fixes the whole stream.
class ArrivalSampler {
 public:
  explicit ArrivalSampler(const DemandModel& demand);
  void sample(Rng& rng, int dt, std::vector<ArrivalBatch>& out) const;

 private:
  struct Pair {
    std::size_t origin;
    std::size_t destination;
    double rate;
  };
  std::vector<Pair> pairs_;
};

std::vector<ArrivalBatch> sample_arrivals(const DemandModel& demand, Rng& rng,
                                          int dt);

struct MatchRecord {
  std::size_t origin = 0;
  std::size_t destination = 0;
  std::int64_t wait = 0;  // seconds
};

/// x_i = min(p_i, v_i): the x_i oldest passengers at each station board,
/// occupied vehicles are scheduled to land at tick + t_ij. Returns x.
std::vector<int> match_fcfs(FleetState& state, const Network& network,
                            std::vector<MatchRecord>* matched = nullptr);

/// y_ij = floor(dpr * surplus_i) toward dest[i] (zero when dest[i] == i).
/// Throws if a destination lies outside neighbors(i) + {i}.
Matrix<int> expand_action(const FleetState& state, const Network& network,
                          const RebalanceAction& action, double dpr);

/// Moves y_ij empty vehicles out of idle and into the schedule. Throws if
/// any origin would exceed its surplus max(v_i - p_i, 0).
void apply_dispatches(FleetState& state, const Network& network,
                      const Matrix<int>& y);

Matrix<int> apply_rebalance(FleetState& state, const Network& network,
                            const RebalanceAction& action, double dpr);

/// One 1 s step: tick += 1, deliver vehicles due now, enqueue new passengers,
/// then match. Returns the passengers matched this tick.
std::vector<MatchRecord> advance_tick(FleetState& state, const Network& network,
                                      std::span<const ArrivalBatch> arrivals);
std::vector<MatchRecord> advance_tick(FleetState& state, const Network& network,
                                      const ArrivalSampler& sampler, Rng& rng);

/// R = -sum_i p_i - alpha * sum_ij y_ij * d_ij (miles).
double reward(const FleetState& state, const Matrix<int>& y, double alpha,
              const Network& network);

/// obs_i = (p_i - v_i) / m.
std::vector<double> observe(const FleetState& state);

struct EpisodeMetrics {
  long long passengers_served = 0;
  long long passengers_arrived = 0;
  long long total_wait = 0;  // seconds, served passengers only
  double avg_wait = 0.0;     // minutes
  long long rebalance_trips = 0;
  double total_evmt = 0.0;   // miles
  double avg_evmt = 0.0;     // miles per rebalance trip
  double wait_cost = 0.0;    // avg_wait * passengers_arrived

  void finalize();
  friend bool operator==(const EpisodeMetrics&, const EpisodeMetrics&) = default;
};

struct EpochOutcome {
  Matrix<int> dispatch;
  double reward = 0.0;
};

/// Step-wise driver over one episode: tick until the next rebalancing epoch,
/// hand the state to a decision maker, apply its dispatches.
class Episode {
 public:
  Episode(const SimConfig& config, const Network& network,
          const DemandModel& demand, std::uint64_t seed);

  // Decision epochs fall at ticks 0, interval, ..., length - interval. Runs
  // ticks up to the next one; false once the episode is over.
  bool advance_to_decision();
  EpochOutcome apply(const Matrix<int>& y);

  const FleetState& state() const noexcept { return state_; }
  const SimConfig& config() const noexcept { return config_; }
  const Network& network() const noexcept { return network_; }
  bool done() const noexcept { return state_.tick >= config_.episode_length; }
  EpisodeMetrics metrics() const;
  std::uint64_t arrival_digest() const noexcept { return digest_; }

 private:
  void step();

  SimConfig config_;
  const Network& network_;
  ArrivalSampler sampler_;
  Rng arrivals_rng_;
  FleetState state_;
  EpisodeMetrics metrics_;
  std::uint64_t digest_;
  std::vector<ArrivalBatch> scratch_;
  bool started_ = false;
};

struct EpisodeResult {
  EpisodeMetrics metrics;
  std::uint64_t arrival_digest = 0;
  std::vector<double> rewards;  // one per decision epoch
};

/// Runs config.episode_length ticks, querying `policy` every
/// rebalance_interval. Arrivals and policy randomness use separate streams of
/// config.seed, so every policy sees the same passengers for a given seed.
EpisodeResult run_episode(const SimConfig& config, const Network& network,
                          const DemandModel& demand, const Policy& policy);

}  // namespace fleet
