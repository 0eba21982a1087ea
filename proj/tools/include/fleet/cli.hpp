#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fleet/decision.hpp"
#include "fleet/scenario.hpp"
#include "fleet/sim.hpp"

namespace fleet::cli {

struct GlobalOptions {
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;  // overrides the config's seed
  std::filesystem::path out_dir = ".";
  int threads = 1;
};

// --- metrics ---------------------------------------------------------------

struct SeedMetrics {
  std::uint64_t seed = 0;
  EpisodeMetrics metrics;
  std::uint64_t arrival_digest = 0;
};

struct Evaluation {
  std::string label;
  std::vector<SeedMetrics> runs;

  double mean_avg_wait() const;
  double mean_avg_evmt() const;
  double mean_rebalance_trips() const;
  double total_wait_cost() const;
  double total_evmt() const;
  double total_arrivals() const;
};

// Seeds base, base + 1, ..., base + count - 1.
std::vector<std::uint64_t> seed_range(std::uint64_t base, int count);

// Runs one episode per seed, up to `threads` at a time.
Evaluation evaluate(const Scenario& scenario, const Policy& policy, std::string label,
                    const std::vector<std::uint64_t>& seeds, int threads);

void write_metrics_csv(const std::filesystem::path& path, const Evaluation& eval);
void write_metrics_json(const std::filesystem::path& path, const Evaluation& eval);
// Per-seed rows keyed by seed; the trailing "mean" row is skipped.
std::vector<SeedMetrics> read_metrics_csv(const std::filesystem::path& path);

// --- comparison tables ---------------------------------------------------------

struct ComparisonRow {
  std::string label;
  double avg_wait = 0.0;  // minutes
  double rebalance_trips = 0.0;
  double avg_evmt = 0.0;  // miles per trip
  double rel_wait_cost = 0.0;
  double rel_evmt = 0.0;
};

// Relatives use totals over all seeds against the row labelled `baseline`.
// A zero baseline total gives NaN relatives.
std::vector<ComparisonRow> compare_rows(const std::vector<Evaluation>& evals,
                                        const std::string& baseline);
void write_comparison_csv(const std::filesystem::path& path, const std::vector<ComparisonRow>& rows);
std::vector<ComparisonRow> read_comparison_csv(const std::filesystem::path& path);
std::string format_comparison(const std::vector<ComparisonRow>& rows);

// Display label for a policy name ("maxweight" -> "MaxWeight", ppo -> "PPO(<alpha>)").
std::string policy_label(const std::string& name, double alpha);
std::string format_alpha(double alpha);

// --- subcommands -----------------------------------------------------------------

struct IngestOptions {
  std::filesystem::path input;
  std::filesystem::path zones;
  std::string window = "08:00-09:00";
  std::optional<std::string> first_date;
  std::optional<std::string> last_date;
  bool weekdays_only = false;
  std::vector<int> qq_zones;
  std::size_t quantiles = 100;
  char delimiter = ',';
};
int cmd_ingest(const GlobalOptions& global, IngestOptions opts);

struct SimulateOptions {
  std::optional<std::string> policy;
  std::optional<int> seeds;
  std::optional<std::filesystem::path> weights;
  std::optional<std::filesystem::path> dump_mcf;  // JSON lines of every solved instance
};
int cmd_simulate(const GlobalOptions& global, const SimulateOptions& opts);

struct TrainOptions {
  std::optional<int> iterations;
  int checkpoint_every = 10;
  bool resume = false;
};
int cmd_train(const GlobalOptions& global, const TrainOptions& opts);

struct CompareOptions {
  std::vector<std::string> policies;
  std::string baseline = "maxweight";
  std::optional<int> seeds;
  std::optional<std::filesystem::path> weights;
};
int cmd_compare(const GlobalOptions& global, const CompareOptions& opts);

struct SweepOptions {
  std::vector<double> alphas;
  std::optional<int> seeds;
  std::optional<int> iterations;
  bool reuse = false;  // load existing weights instead of retraining
};
int cmd_sweep_alpha(const GlobalOptions& global, const SweepOptions& opts);

// Scenario with global overrides applied.
Scenario load(const GlobalOptions& global);

// Trains with checkpoints in `dir`; returns the final state.
TrainState train_policy(const Scenario& scenario, const std::filesystem::path& dir,
                        int checkpoint_every, bool resume, int threads, bool verbose);

// {"error": {"kind": ..., "message": ...}}
std::string error_json(std::string_view kind, std::string_view message);

}  // namespace fleet::cli
