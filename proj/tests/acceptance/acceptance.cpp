// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Pass criterion numbers as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fleet/cli.hpp"
#include "fleet/gae.hpp"
#include "fleet/ingest.hpp"
#include "fleet/mincostflow.hpp"
#include "fleet/mlp.hpp"
#include "fleet/neural.hpp"
#include "fleet/policy.hpp"
#include "fleet/scenario.hpp"
#include "fleet/sim.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace fleet;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

fs::path work_dir() {
  const fs::path dir = fs::path(FLEET_ACCEPTANCE_WORK_DIR);
  fs::create_directories(dir);
  return dir;
}

// --- 1: dynamics oracle ---------------------------------------------------------

Outcome dynamics_oracle() {
  const auto start = Clock::now();
  Matrix<double> d(5, 5, 0.0);
  const double xs[5] = {0.0, 0.4, 1.1, 1.5, 2.6};
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 5; ++j) d(i, j) = std::abs(xs[i] - xs[j]);
  }
  const Network net = build_network(d, 10.0, 2);
  DemandModel demand;
  demand.rate = Matrix<double>(5, 5, 0.0);
  Rng fill(99);
  std::uniform_real_distribution<double> r(0.0005, 0.006);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 5; ++j) demand.rate(i, j) = i == j ? 0.0 : r(fill);
  }
  demand.rate(2, 4) = 0.0;

  SimConfig cfg;
  cfg.fleet_size = 25;
  cfg.episode_length = 1000;
  cfg.seed = 2024;
  Episode ep(cfg, net, demand, cfg.seed);

  // The reference redraws the same Poisson stream with its own loop.
  Rng rng = make_rng(cfg.seed, Stream::kArrivals);
  testing::ReferenceSim ref(net.travel_time, FleetState::initial(5, 25).idle, cfg.episode_length);
  std::size_t mismatches = 0;
  std::vector<ArrivalBatch> arrivals;
  while (ep.advance_to_decision()) {
    ep.apply(Matrix<int>(5, 5, 0));
    const std::int64_t target = std::min<std::int64_t>(ep.state().tick + cfg.rebalance_interval, cfg.episode_length);
    while (ref.tick < target) {
      arrivals.clear();
      for (std::size_t i = 0; i < 5; ++i) {
        for (std::size_t j = 0; j < 5; ++j) {
          if (demand.rate(i, j) <= 0.0) continue;
          std::poisson_distribution<int> pd(demand.rate(i, j));
          const int c = pd(rng);
          if (c > 0) arrivals.push_back({i, j, c});
        }
      }
      ref.step(arrivals);
    }
  }
  const FleetState& s = ep.state();
  if (s.tick != ref.tick) ++mismatches;
  if (s.idle != ref.v) ++mismatches;
  for (std::size_t i = 0; i < 5; ++i) {
    if (s.queues[i].size() != ref.queue[i].size()) {
      ++mismatches;
      continue;
    }
    for (std::size_t q = 0; q < s.queues[i].size(); ++q) {
      if (s.queues[i][q].destination != ref.queue[i][q].destination ||
          s.queues[i][q].arrival_tick != ref.queue[i][q].arrival_tick) {
        ++mismatches;
      }
    }
  }
  for (std::size_t t = static_cast<std::size_t>(s.tick) + 1; t < ref.incoming.size(); ++t) {
    std::vector<int> lib(5, 0);
    if (auto it = s.in_transit.find(static_cast<std::int64_t>(t)); it != s.in_transit.end()) {
      for (const auto& tr : it->second) lib[tr.destination] += tr.count;
    }
    if (lib != ref.incoming[t]) ++mismatches;
  }
  const EpisodeMetrics m = ep.metrics();
  if (m.passengers_served != ref.served || m.total_wait != ref.waited) ++mismatches;
  const double secs = seconds_since(start);
  std::ostringstream out;
  out << "served " << m.passengers_served << ", queued " << std::accumulate(s.queues.begin(), s.queues.end(), std::size_t{0},
                                                                             [](std::size_t a, const auto& q) { return a + q.size(); })
      << ", in transit " << s.in_transit_count() << ", mismatches " << mismatches << ", " << secs << " s";
  return {mismatches == 0 && m.passengers_served > 0 && secs < 1.0, out.str()};
}

// --- 2: conservation ---------------------------------------------------------------

Outcome conservation() {
  const auto start = Clock::now();
  Rng rng(7);
  long long ticks = 0;
  long long violations = 0;
  long long dispatched = 0;
  int episode = 0;
  while (ticks < 100000) {
    ++episode;
    const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 8)(rng);
    Matrix<double> d(n, n, 0.0);
    std::uniform_real_distribution<double> coord(0.0, 3.0);
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = coord(rng);
      y[i] = coord(rng);
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) d(i, j) = std::abs(x[i] - x[j]) + std::abs(y[i] - y[j]);
    }
    const std::size_t k = std::uniform_int_distribution<std::size_t>(1, n - 1)(rng);
    const Network net = build_network(d, 10.0, k);
    DemandModel demand;
    demand.rate = Matrix<double>(n, n, 0.0);
    std::uniform_real_distribution<double> rate(0.0, 0.02);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) demand.rate(i, j) = i == j ? 0.0 : rate(rng);
    }
    SimConfig cfg;
    cfg.fleet_size = std::uniform_int_distribution<int>(1, 60)(rng);
    cfg.dpr = std::uniform_real_distribution<double>(0.05, 1.0)(rng);
    cfg.rebalance_interval = std::uniform_int_distribution<int>(1, 50)(rng);
    cfg.episode_length = 2000;
    cfg.seed = rng();
    const Mlp net_policy = Mlp::uniform({n, 8, n}, rng, 3.0);
    const int kind = episode % 6;

    FleetState s = FleetState::initial(n, cfg.fleet_size);
    const ArrivalSampler sampler(demand);
    Rng arng = make_rng(cfg.seed, Stream::kArrivals);
    Rng prng = make_rng(cfg.seed, Stream::kPolicy);
    for (int t = 0; t < cfg.episode_length; ++t) {
      if (t % cfg.rebalance_interval == 0) {
        PolicyDecision dec;
        switch (kind) {
          case 0: dec = maxweight_decide(s, net); break;
          case 1: dec = backpressure_decide(s, net, {0.5}); break;
          case 2: dec = proportional_decide(s, net); break;
          case 3: dec = costsensitive_decide(s, net); break;
          case 4: {
            const NeuralDecision nd = neural_decide(s, net, net_policy, DecodeMode::kSample, prng);
            dec = from_dispatch_matrix(expand_action(s, net, nd.action, cfg.dpr));
            break;
          }
          default:
            // Uniformly random split of part of each station's surplus.
            for (std::size_t i = 0; i < n; ++i) {
              int left = std::uniform_int_distribution<int>(0, s.surplus(i))(prng);
              for (std::size_t j : net.neighbors[i]) {
                const int c = std::uniform_int_distribution<int>(0, left)(prng);
                if (c > 0) dec.dispatches.push_back({i, j, c});
                left -= c;
              }
            }
        }
        const Matrix<int> ymat = to_dispatch_matrix(dec, n);
        for (std::size_t i = 0; i < n; ++i) {
          int out = 0;
          for (std::size_t j = 0; j < n; ++j) out += ymat(i, j);
          if (out > s.surplus(i)) ++violations;
          dispatched += out;
        }
        apply_dispatches(s, net, ymat);
        if (!s.conserved()) ++violations;
      }
      advance_tick(s, net, sampler, arng);
      ++ticks;
      if (!s.conserved()) ++violations;
    }
  }
  const double secs = seconds_since(start);
  std::ostringstream out;
  out << ticks << " ticks over " << episode << " episodes, " << dispatched << " vehicles dispatched, "
      << violations << " violations, " << secs << " s";
  return {violations == 0 && ticks >= 100000 && secs < 30.0, out.str()};
}

// --- 3: gradients ----------------------------------------------------------------------

Outcome gradients() {
  const auto start = Clock::now();
  Rng rng(3);
  std::uniform_int_distribution<std::size_t> width(1, 8);
  std::uniform_int_distribution<std::size_t> depth(1, 3);
  double worst = 0.0;
  std::size_t failures = 0;
  for (int net_id = 0; net_id < 100; ++net_id) {
    std::vector<std::size_t> sizes{width(rng)};
    const std::size_t layers = depth(rng);
    for (std::size_t l = 0; l < layers; ++l) sizes.push_back(width(rng));
    sizes.push_back(width(rng));
    const Mlp net = Mlp::uniform(sizes, rng, 1.0);
    Eigen::MatrixXd x(static_cast<Eigen::Index>(sizes.front()), 4);
    Eigen::MatrixXd c(static_cast<Eigen::Index>(sizes.back()), 4);
    std::normal_distribution<double> normal;
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
    for (Eigen::Index i = 0; i < c.size(); ++i) c.data()[i] = normal(rng);
    const auto check = testing::finite_difference_check(net, x, c, 1e-5);
    worst = std::max(worst, check.max_rel_error);
    if (check.max_rel_error >= 1e-4) ++failures;
  }
  const double secs = seconds_since(start);
  std::ostringstream out;
  out << "100 nets, worst relative error " << worst << ", " << failures << " failing, " << secs << " s";
  return {failures == 0 && secs < 60.0, out.str()};
}

// --- 4: solver optimality --------------------------------------------------------------

Outcome solver() {
  const auto start = Clock::now();
  Rng rng(4);
  std::uniform_int_distribution<int> dim(1, 4);
  std::uniform_int_distribution<std::int64_t> amount(0, 5);
  std::uniform_int_distribution<std::int64_t> price(0, 20);
  int mismatches = 0;
  const int count = 1000;
  for (int t = 0; t < count; ++t) {
    TransportationInstance inst;
    inst.supplies.resize(static_cast<std::size_t>(dim(rng)));
    inst.demands.resize(static_cast<std::size_t>(dim(rng)));
    for (auto& s : inst.supplies) s = amount(rng);
    for (auto& d : inst.demands) d = amount(rng);
    inst.cost = Matrix<std::int64_t>(inst.supplies.size(), inst.demands.size());
    for (auto& c : inst.cost.values()) c = price(rng);
    const FlowSolution sol = solve_transportation(inst);
    const std::int64_t want = testing::brute_force_transport_cost(inst.supplies, inst.demands, inst.cost);
    if (sol.total_cost != want) ++mismatches;
  }
  const double secs = seconds_since(start);
  std::ostringstream out;
  out << count << " instances, " << mismatches << " cost mismatches, " << secs << " s";
  return {mismatches == 0 && secs < 60.0, out.str()};
}

// --- 5: GAE --------------------------------------------------------------------------------

Outcome gae() {
  const auto start = Clock::now();
  Rng rng(5);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<std::size_t> len(1, 200);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (int s = 0; s < 1000; ++s) {
    const std::size_t T = len(rng);
    std::vector<double> r(T), v(T);
    for (auto& x : r) x = normal(rng);
    for (auto& x : v) x = normal(rng);
    const double boot = normal(rng);
    const double gamma = s % 2 ? 0.99 : unit(rng);
    const double lambda = s % 2 ? 0.95 : unit(rng);
    const GaeResult got = gae_advantages(r, v, boot, gamma, lambda);
    const auto want = testing::gae_direct(r, v, boot, gamma, lambda);
    for (std::size_t t = 0; t < T; ++t) worst = std::max(worst, std::abs(got.advantages[t] - want[t]));
  }
  const double secs = seconds_since(start);
  std::ostringstream out;
  out << "1000 sequences, max abs difference " << worst << ", " << secs << " s";
  return {worst <= 1e-10 && secs < 10.0, out.str()};
}

// --- 6: ingestion round trip -----------------------------------------------------------------

Outcome ingestion() {
  const auto start = Clock::now();
  const fs::path dir = work_dir() / "ingest";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::vector<int> zones{48, 68, 100, 161, 237};
  Matrix<double> rate(5, 5, 0.0);
  Rng rng(6);
  std::uniform_real_distribution<double> busy(0.01, 0.05);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      if (i == j) continue;
      // A few sparse pairs stay under the 100-event threshold.
      rate(i, j) = (i + j) % 4 == 1 ? 0.0005 : busy(rng);
    }
  }
  std::vector<TripRecord> trips = testing::poisson_trips(rate, zones, 15, 8 * 3600, 9 * 3600, rng);
  std::shuffle(trips.begin(), trips.end(), rng);
  write_trips_csv(dir / "trips.csv", trips);
  std::ofstream(dir / "zones.txt") << "48 68 100 161 237\n";

  cli::IngestOptions opts;
  opts.input = dir / "trips.csv";
  opts.zones = dir / "zones.txt";
  cli::GlobalOptions g;
  g.out_dir = dir / "out";
  cli::cmd_ingest(g, opts);

  const LabeledMatrix ia = read_matrix_csv(g.out_dir / "interarrival.csv");
  const LabeledMatrix counts = read_matrix_csv(g.out_dir / "trip_counts.csv");
  const DemandModel recovered = demand_from_interarrival(ia.values);
  int checked = 0;
  int skipped = 0;
  int bad = 0;
  double worst = 0.0;
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      if (i == j) continue;
      if (counts.values(i, j) < 100) {
        ++skipped;
        continue;
      }
      ++checked;
      const double rel = std::abs(recovered.rate(i, j) - rate(i, j)) / rate(i, j);
      worst = std::max(worst, rel);
      if (rel > 0.10) ++bad;
    }
  }
  const double secs = seconds_since(start);
  std::ostringstream out;
  out << trips.size() << " records, " << checked << " pairs checked (" << skipped
      << " under 100 events), worst relative error " << worst << ", " << secs << " s";
  return {bad == 0 && checked > 0 && secs < 30.0, out.str()};
}

// --- desk-scale training shared by 7, 8 and 10 -----------------------------------------------------

struct DeskRun {
  cli::Evaluation eval;
  std::vector<double> rewards;  // per iteration
};

class Desk {
 public:
  Desk() : base_(load_scenario(testing::data_dir() / "desk5" / "scenario.cfg")) {}

  const Scenario& scenario() const { return base_; }

  std::vector<std::uint64_t> eval_seeds() const { return cli::seed_range(base_.sim.seed, base_.eval_seeds); }

  cli::Evaluation baseline(const std::string& name) const {
    const auto policy = make_policy(name, base_);
    return cli::evaluate(base_, *policy, cli::policy_label(name, base_.sim.alpha), eval_seeds(), 1);
  }

  // Trains (or reuses a finished run in the work directory) and evaluates greedily.
  const DeskRun& run(double alpha, std::uint64_t train_seed) {
    const std::string key = cli::format_alpha(alpha) + "_seed" + std::to_string(train_seed);
    for (const auto& [k, r] : runs_) {
      if (k == key) return r;
    }
    Scenario s = base_;
    s.sim.alpha = alpha;
    s.ppo.seed = train_seed;
    const fs::path dir = work_dir() / "desk" / key;
    const auto start = Clock::now();
    cli::train_policy(s, dir, 10, true, 1, false);
    std::cerr << "  trained " << key << " in " << seconds_since(start) << " s\n";
    DeskRun r;
    std::ifstream diag(dir / "diagnostics.csv");
    std::string line;
    std::getline(diag, line);
    while (std::getline(diag, line)) {
      std::istringstream row(line);
      std::string it, reward;
      std::getline(row, it, ',');
      std::getline(row, reward, ',');
      r.rewards.push_back(std::stod(reward));
    }
    s.weights_path = dir / "policy.weights";
    const auto policy = make_policy("ppo", s);
    r.eval = cli::evaluate(s, *policy, cli::policy_label("ppo", alpha), eval_seeds(), 1);
    runs_.emplace_back(key, std::move(r));
    return runs_.back().second;
  }

 private:
  Scenario base_;
  std::vector<std::pair<std::string, DeskRun>> runs_;
};

Desk& desk() {
  static Desk d;
  return d;
}

Outcome desk_learning() {
  const auto start = Clock::now();
  const cli::Evaluation none = desk().baseline("none");
  const cli::Evaluation mw = desk().baseline("maxweight");
  const DeskRun& ppo = desk().run(10.0, desk().scenario().ppo.seed);
  const double w = ppo.eval.mean_avg_wait();
  const bool a = w < 0.5 * none.mean_avg_wait();
  const bool b = w <= 1.2 * mw.mean_avg_wait();
  const double secs = seconds_since(start);
  std::ostringstream out;
  out << "PPO(1e1) wait " << w << " min vs None " << none.mean_avg_wait() << " (need < "
      << 0.5 * none.mean_avg_wait() << ") and MaxWeight " << mw.mean_avg_wait() << " (need <= "
      << 1.2 * mw.mean_avg_wait() << "), " << secs << " s";
  return {a && b && secs < 1800.0, out.str()};
}

Outcome tradeoff() {
  const std::vector<double> alphas{0.1, 10.0, 1000.0};
  std::vector<double> wait, evmt;
  std::ostringstream out;
  for (double alpha : alphas) {
    const DeskRun& r = desk().run(alpha, desk().scenario().ppo.seed);
    wait.push_back(r.eval.mean_avg_wait());
    evmt.push_back(r.eval.total_evmt());
    out << "alpha " << cli::format_alpha(alpha) << ": wait " << wait.back() << " min, EVMT " << evmt.back()
        << " mi; ";
  }
  const bool ok = wait[0] <= wait[1] && wait[1] <= wait[2] && evmt[0] >= evmt[1] && evmt[1] >= evmt[2];
  return {ok, out.str()};
}

Outcome benchmark_sanity() {
  const Scenario s = load_scenario(testing::data_dir() / "fixture20" / "scenario.cfg");
  std::ostringstream out;
  std::map<std::string, cli::Evaluation> evals;
  bool fast = true;
  for (const std::string name : {"none", "maxweight", "backpressure", "proportional", "costsensitive"}) {
    const auto start = Clock::now();
    const auto policy = make_policy(name, s);
    evals[name] = cli::evaluate(s, *policy, cli::policy_label(name, s.sim.alpha), {s.sim.seed}, 1);
    const double secs = seconds_since(start);
    fast = fast && secs < 120.0;
    out << cli::policy_label(name, s.sim.alpha) << " wait " << evals[name].mean_avg_wait() << " min, EVMT "
        << evals[name].total_evmt() << " mi (" << secs << " s); ";
  }
  const double none = evals["none"].mean_avg_wait();
  const double prop = evals["proportional"].mean_avg_wait();
  const double mw = evals["maxweight"].mean_avg_wait();
  // "Much greater": an order of magnitude.
  const bool none_dominates = none > 10.0 * std::max(prop, mw);
  const bool prop_over_mw = prop > mw;
  const bool cs_evmt = evals["costsensitive"].total_evmt() > evals["maxweight"].total_evmt();
  out << "None>>Prop " << (none_dominates ? "yes" : "no") << ", Prop>MaxWeight " << (prop_over_mw ? "yes" : "no")
      << ", CostSensitive EVMT>MaxWeight " << (cs_evmt ? "yes" : "no");
  return {fast && none_dominates && prop_over_mw && cs_evmt, out.str()};
}

Outcome training_curve() {
  std::vector<double> gains;
  std::ostringstream out;
  const std::uint64_t base = desk().scenario().ppo.seed;
  for (std::uint64_t k = 0; k < 5; ++k) {
    const DeskRun& r = desk().run(10.0, base + k);
    gains.push_back(r.rewards.back() - r.rewards.front());
    out << "seed " << base + k << ": " << r.rewards.front() << " -> " << r.rewards.back() << "; ";
  }
  const double mean = std::accumulate(gains.begin(), gains.end(), 0.0) / 5.0;
  double var = 0.0;
  for (double g : gains) var += (g - mean) * (g - mean);
  const double se = std::sqrt(var / 4.0) / std::sqrt(5.0);
  const double t = se > 0.0 ? mean / se : (mean > 0.0 ? INFINITY : 0.0);
  // One-sided paired t test at 95%, 4 degrees of freedom.
  out << "mean gain " << mean << ", t = " << t << " (need > 2.132)";
  return {t > 2.132, out.str()};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, dynamics_oracle}, {2, conservation},   {3, gradients},        {4, solver},
      {5, gae},             {6, ingestion},      {7, desk_learning},    {8, tradeoff},
      {9, benchmark_sanity}, {10, training_curve}};
  std::set<int> wanted;
  for (int a = 1; a < argc; ++a) wanted.insert(std::atoi(argv[a]));

  int failed = 0;
  for (const auto& [id, fn] : criteria) {
    if (!wanted.empty() && !wanted.count(id)) continue;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << " | " << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
