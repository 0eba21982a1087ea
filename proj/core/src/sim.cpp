#include "fleet/sim.hpp"

#include <algorithm>
#include <cmath>

#include "fleet/error.hpp"

namespace fleet {

int PolicyDecision::total() const noexcept {
  int total = 0;
  for (const auto& d : dispatches) total += d.count;
  return total;
}

Matrix<int> to_dispatch_matrix(const PolicyDecision& decision, std::size_t n) {
  Matrix<int> y(n, n, 0);
  for (const auto& d : decision.dispatches) {
    require(d.origin < n && d.destination < n, "dispatch station out of range");
    require(d.origin != d.destination, "dispatch origin equals destination");
    require(d.count > 0, "dispatch counts must be positive");
    y(d.origin, d.destination) += d.count;
  }
  return y;
}

PolicyDecision from_dispatch_matrix(const Matrix<int>& y) {
  PolicyDecision out;
  for (std::size_t i = 0; i < y.rows(); ++i) {
    for (std::size_t j = 0; j < y.cols(); ++j) {
      if (y(i, j) > 0) out.dispatches.push_back({i, j, y(i, j)});
    }
  }
  return out;
}

void SimConfig::validate() const {
  require(rebalance_interval >= 1, "rebalance_interval must be a positive number of ticks");
  require(episode_length >= 1, "episode_length must be positive");
  require(fleet_size >= 1, "fleet_size must be positive");
  require(dpr > 0.0 && dpr <= 1.0, "dpr must lie in (0, 1]");
  require(std::isfinite(alpha) && alpha >= 0.0, "alpha must be finite and nonnegative");
}

FleetState FleetState::initial(std::size_t n, int fleet_size) {
  require(n >= 1, "state needs at least one station");
  require(fleet_size >= 0, "fleet size must be nonnegative");
  FleetState s;
  s.fleet_size = fleet_size;
  s.queues.resize(n);
  s.idle.assign(n, fleet_size / static_cast<int>(n));
  const int remainder = fleet_size % static_cast<int>(n);
  for (int i = 0; i < remainder; ++i) ++s.idle[i];
  return s;
}

int FleetState::surplus(std::size_t i) const {
  return std::max(idle[i] - queue_length(i), 0);
}

int FleetState::deficit(std::size_t i) const {
  return std::max(queue_length(i) - idle[i], 0);
}

long long FleetState::in_transit_count() const {
  long long total = 0;
  for (const auto& [t, batch] : in_transit) {
    for (const auto& tr : batch) total += tr.count;
  }
  return total;
}

bool FleetState::conserved() const {
  long long total = 0;
  for (int v : idle) {
    if (v < 0) return false;
    total += v;
  }
  for (const auto& [t, batch] : in_transit) {
    if (t <= tick) return false;
    for (const auto& tr : batch) {
      if (tr.count <= 0 || tr.destination >= size()) return false;
      total += tr.count;
    }
  }
  return total == fleet_size;
}

void FleetState::schedule(std::int64_t arrival_tick, std::size_t destination,
                          int count, TripKind kind) {
  auto& batch = in_transit[arrival_tick];
  for (auto& tr : batch) {
    if (tr.destination == destination && tr.kind == kind) {
      tr.count += count;
      return;
    }
  }
  batch.push_back({destination, count, kind});
}

ArrivalSampler::ArrivalSampler(const DemandModel& demand) {
  const std::size_t n = demand.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double r = demand.rate(i, j);
      require(std::isfinite(r) && r >= 0.0, "arrival rates must be finite and nonnegative");
      if (i != j && r > 0.0) pairs_.push_back({i, j, r});
    }
  }
}

void ArrivalSampler::sample(Rng& rng, int dt, std::vector<ArrivalBatch>& out) const {
  out.clear();
  for (const auto& p : pairs_) {
    std::poisson_distribution<int> dist(p.rate * dt);
    const int count = dist(rng);
    if (count > 0) out.push_back({p.origin, p.destination, count});
  }
}

std::vector<ArrivalBatch> sample_arrivals(const DemandModel& demand, Rng& rng, int dt) {
  require(dt >= 1, "dt must be at least one tick");
  std::vector<ArrivalBatch> out;
  ArrivalSampler(demand).sample(rng, dt, out);
  return out;
}

std::vector<int> match_fcfs(FleetState& state, const Network& network,
                            std::vector<MatchRecord>* matched) {
  const std::size_t n = state.size();
  std::vector<int> departures(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    auto& queue = state.queues[i];
    const int x = std::min(static_cast<int>(queue.size()), state.idle[i]);
    for (int k = 0; k < x; ++k) {
      const Passenger& pax = queue.front();
      state.schedule(state.tick + network.travel_time(i, pax.destination),
                     pax.destination, 1, TripKind::kOccupied);
      if (matched) {
        matched->push_back({i, pax.destination, state.tick - pax.arrival_tick});
      }
      queue.pop_front();
    }
    state.idle[i] -= x;
    departures[i] = x;
  }
  return departures;
}

Matrix<int> expand_action(const FleetState& state, const Network& network,
                          const RebalanceAction& action, double dpr) {
  const std::size_t n = state.size();
  require(action.dest.size() == n, "action must name one destination per station");
  Matrix<int> y(n, n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = action.dest[i];
    if (j == i) continue;
    const auto& nb = network.neighbors[i];
    require(std::find(nb.begin(), nb.end(), j) != nb.end(),
            "destination " + std::to_string(j) + " is not a neighbour of station " + std::to_string(i));
    y(i, j) = static_cast<int>(std::floor(dpr * state.surplus(i)));
  }
  return y;
}

void apply_dispatches(FleetState& state, const Network& network, const Matrix<int>& y) {
  const std::size_t n = state.size();
  require(y.rows() == n && y.cols() == n, "dispatch matrix has the wrong shape");
  for (std::size_t i = 0; i < n; ++i) {
    long long out = 0;
    for (std::size_t j = 0; j < n; ++j) {
      require(y(i, j) >= 0, "dispatch counts must be nonnegative");
      require(i != j || y(i, j) == 0, "self-dispatch is not a rebalancing trip");
      out += y(i, j);
    }
    require(out <= state.surplus(i),
            "station " + std::to_string(i) + " dispatches " + std::to_string(out) +
                " vehicles but has surplus " + std::to_string(state.surplus(i)));
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const int count = y(i, j);
      if (count == 0) continue;
      state.idle[i] -= count;
      state.schedule(state.tick + network.travel_time(i, j), j, count, TripKind::kEmpty);
    }
  }
}

Matrix<int> apply_rebalance(FleetState& state, const Network& network,
                            const RebalanceAction& action, double dpr) {
  Matrix<int> y = expand_action(state, network, action, dpr);
  apply_dispatches(state, network, y);
  return y;
}

namespace {

void deliver(FleetState& state) {
  auto it = state.in_transit.find(state.tick);
  if (it == state.in_transit.end()) return;
  for (const auto& tr : it->second) state.idle[tr.destination] += tr.count;
  state.in_transit.erase(it);
}

void enqueue(FleetState& state, std::span<const ArrivalBatch> arrivals) {
  for (const auto& a : arrivals) {
    for (int c = 0; c < a.count; ++c) {
      state.queues[a.origin].push_back({a.origin, a.destination, state.tick});
    }
  }
}

}  // namespace

std::vector<MatchRecord> advance_tick(FleetState& state, const Network& network,
                                      std::span<const ArrivalBatch> arrivals) {
  ++state.tick;
  deliver(state);
  enqueue(state, arrivals);
  std::vector<MatchRecord> matched;
  match_fcfs(state, network, &matched);
  return matched;
}

std::vector<MatchRecord> advance_tick(FleetState& state, const Network& network,
                                      const ArrivalSampler& sampler, Rng& rng) {
  std::vector<ArrivalBatch> arrivals;
  sampler.sample(rng, 1, arrivals);
  return advance_tick(state, network, arrivals);
}

double reward(const FleetState& state, const Matrix<int>& y, double alpha,
              const Network& network) {
  double waiting = 0.0;
  for (std::size_t i = 0; i < state.size(); ++i) waiting += state.queue_length(i);
  double miles = 0.0;
  for (std::size_t i = 0; i < y.rows(); ++i) {
    for (std::size_t j = 0; j < y.cols(); ++j) {
      if (y(i, j) != 0) miles += y(i, j) * network.distance(i, j);
    }
  }
  return -waiting - alpha * miles;
}

std::vector<double> observe(const FleetState& state) {
  std::vector<double> obs(state.size());
  const double m = state.fleet_size > 0 ? state.fleet_size : 1.0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    obs[i] = (state.queue_length(i) - state.idle[i]) / m;
  }
  return obs;
}

void EpisodeMetrics::finalize() {
  avg_wait = passengers_served > 0
                 ? static_cast<double>(total_wait) / passengers_served / 60.0
                 : 0.0;
  avg_evmt = rebalance_trips > 0 ? total_evmt / rebalance_trips : 0.0;
  wait_cost = avg_wait * passengers_arrived;
}

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

std::uint64_t fnv_mix(std::uint64_t h, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) {
    h ^= (v >> (8 * b)) & 0xffU;
    h *= kFnvPrime;
  }
  return h;
}

}  // namespace

Episode::Episode(const SimConfig& config, const Network& network,
                 const DemandModel& demand, std::uint64_t seed)
    : config_(config),
      network_(network),
      sampler_(demand),
      arrivals_rng_(make_rng(seed, Stream::kArrivals)),
      state_(FleetState::initial(network.size(), config.fleet_size)),
      digest_(kFnvOffset) {
  config_.validate();
  require(demand.size() == network.size(), "demand and network sizes differ");
}

void Episode::step() {
  sampler_.sample(arrivals_rng_, 1, scratch_);
  for (const auto& a : scratch_) {
    metrics_.passengers_arrived += a.count;
    digest_ = fnv_mix(digest_, static_cast<std::uint64_t>(state_.tick + 1));
    digest_ = fnv_mix(digest_, a.origin);
    digest_ = fnv_mix(digest_, a.destination);
    digest_ = fnv_mix(digest_, static_cast<std::uint64_t>(a.count));
  }
  for (const auto& m : advance_tick(state_, network_, scratch_)) {
    ++metrics_.passengers_served;
    metrics_.total_wait += m.wait;
  }
}

bool Episode::advance_to_decision() {
  if (!started_) {
    started_ = true;
    return state_.tick < config_.episode_length;
  }
  while (state_.tick < config_.episode_length) {
    step();
    if (state_.tick % config_.rebalance_interval == 0) break;
  }
  return state_.tick < config_.episode_length;
}

EpochOutcome Episode::apply(const Matrix<int>& y) {
  apply_dispatches(state_, network_, y);
  EpochOutcome out;
  out.reward = reward(state_, y, config_.alpha, network_);
  for (std::size_t i = 0; i < y.rows(); ++i) {
    for (std::size_t j = 0; j < y.cols(); ++j) {
      if (y(i, j) == 0) continue;
      metrics_.rebalance_trips += y(i, j);
      metrics_.total_evmt += y(i, j) * network_.distance(i, j);
    }
  }
  out.dispatch = y;
  return out;
}

EpisodeMetrics Episode::metrics() const {
  EpisodeMetrics m = metrics_;
  m.finalize();
  return m;
}

EpisodeResult run_episode(const SimConfig& config, const Network& network,
                          const DemandModel& demand, const Policy& policy) {
  Episode episode(config, network, demand, config.seed);
  Rng policy_rng = make_rng(config.seed, Stream::kPolicy);
  EpisodeResult result;
  while (episode.advance_to_decision()) {
    DecisionContext ctx{episode.state(), network, config, policy_rng};
    const PolicyDecision decision = policy.decide(ctx);
    const Matrix<int> y = to_dispatch_matrix(decision, network.size());
    result.rewards.push_back(episode.apply(y).reward);
  }
  result.metrics = episode.metrics();
  result.arrival_digest = episode.arrival_digest();
  return result;
}

}  // namespace fleet
