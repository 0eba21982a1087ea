#include <exception>
#include <iostream>

#include <CLI11.hpp>

#include "fleet/cli.hpp"
#include "fleet/error.hpp"

int main(int argc, char** argv) {
  using namespace fleet::cli;

  CLI::App app{"Fleet rebalancing simulator, benchmarks and PPO trainer"};
  app.require_subcommand(1);

  GlobalOptions global;
  std::uint64_t seed = 0;
  std::string config;
  std::string out_dir = ".";
  app.add_option("--config", config, "Scenario (or ingest) config file");
  auto* seed_opt = app.add_option("--seed", seed, "Override the config's base seed");
  app.add_option("--out-dir", out_dir, "Output directory")->capture_default_str();
  app.add_option("--threads", global.threads, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();

  IngestOptions ingest;
  std::string input, zones, first_date, last_date;
  auto* c_ingest = app.add_subcommand("ingest", "Filter trip records and build demand matrices");
  c_ingest->add_option("--input", input, "Trip records (CSV)");
  c_ingest->add_option("--zones", zones, "Ordered zone ID list");
  c_ingest->add_option("--window", ingest.window, "Pickup window HH:MM-HH:MM")->capture_default_str();
  auto* first_opt = c_ingest->add_option("--first-date", first_date, "Earliest kept date (YYYY-MM-DD)");
  auto* last_opt = c_ingest->add_option("--last-date", last_date, "Latest kept date (YYYY-MM-DD)");
  c_ingest->add_flag("--weekdays-only", ingest.weekdays_only, "Drop Saturday and Sunday pickups");
  c_ingest->add_option("--qq-zones", ingest.qq_zones, "Pickup zones for exponential-fit quantiles");
  c_ingest->add_option("--quantiles", ingest.quantiles, "Quantile count")->capture_default_str();
  c_ingest->add_option("--delimiter", ingest.delimiter, "Field delimiter");

  SimulateOptions sim;
  std::string sim_policy, sim_weights, dump_mcf;
  int sim_seeds = 0;
  auto* c_sim = app.add_subcommand("simulate", "Run episodes of one policy");
  auto* sim_policy_opt = c_sim->add_option("--policy", sim_policy, "Policy name (overrides config)");
  auto* sim_seeds_opt = c_sim->add_option("--seeds", sim_seeds, "Number of seeds")->check(CLI::PositiveNumber);
  auto* sim_weights_opt = c_sim->add_option("--weights", sim_weights, "PPO weights file");
  auto* dump_opt = c_sim->add_option("--dump-mcf", dump_mcf, "Write CostSensitive flow instances as JSON lines");

  TrainOptions train;
  int iterations = 0;
  auto* c_train = app.add_subcommand("train", "Train a PPO rebalancing policy");
  auto* iter_opt = c_train->add_option("--iterations", iterations, "Override ppo.iterations")->check(CLI::NonNegativeNumber);
  c_train->add_option("--checkpoint-every", train.checkpoint_every, "Iterations between checkpoints")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  c_train->add_flag("--resume", train.resume, "Continue from the checkpoint in --out-dir");

  CompareOptions compare;
  std::string cmp_weights;
  int cmp_seeds = 0;
  auto* c_cmp = app.add_subcommand("compare", "Evaluate several policies on shared arrival streams");
  c_cmp->add_option("--policies", compare.policies, "Policy names")->delimiter(',');
  c_cmp->add_option("--baseline", compare.baseline, "Baseline policy for relative columns")->capture_default_str();
  auto* cmp_seeds_opt = c_cmp->add_option("--seeds", cmp_seeds, "Number of seeds")->check(CLI::PositiveNumber);
  auto* cmp_weights_opt = c_cmp->add_option("--weights", cmp_weights, "PPO weights file");

  SweepOptions sweep;
  int sweep_seeds = 0;
  int sweep_iters = 0;
  auto* c_sweep = app.add_subcommand("sweep-alpha", "Train and evaluate PPO across reward weights");
  c_sweep->add_option("--alphas", sweep.alphas, "Reward weights")->delimiter(',')->required();
  auto* sweep_seeds_opt = c_sweep->add_option("--seeds", sweep_seeds, "Number of seeds")->check(CLI::PositiveNumber);
  auto* sweep_iter_opt = c_sweep->add_option("--iterations", sweep_iters, "Override ppo.iterations");
  c_sweep->add_flag("--reuse", sweep.reuse, "Load weights already present in the output tree");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << error_json("usage", e.what()) << '\n';
    return 2;
  }

  try {
    global.config = config;
    global.out_dir = out_dir;
    if (*seed_opt) global.seed = seed;
    if (*c_ingest) {
      ingest.input = input;
      ingest.zones = zones;
      if (*first_opt) ingest.first_date = first_date;
      if (*last_opt) ingest.last_date = last_date;
      return cmd_ingest(global, ingest);
    }
    if (*c_sim) {
      if (*sim_policy_opt) sim.policy = sim_policy;
      if (*sim_seeds_opt) sim.seeds = sim_seeds;
      if (*sim_weights_opt) sim.weights = sim_weights;
      if (*dump_opt) sim.dump_mcf = dump_mcf;
      return cmd_simulate(global, sim);
    }
    if (*c_train) {
      if (*iter_opt) train.iterations = iterations;
      return cmd_train(global, train);
    }
    if (*c_cmp) {
      if (*cmp_seeds_opt) compare.seeds = cmp_seeds;
      if (*cmp_weights_opt) compare.weights = cmp_weights;
      return cmd_compare(global, compare);
    }
    if (*c_sweep) {
      if (*sweep_seeds_opt) sweep.seeds = sweep_seeds;
      if (*sweep_iter_opt) sweep.iterations = sweep_iters;
      return cmd_sweep_alpha(global, sweep);
    }
  } catch (const fleet::Error& e) {
    std::cerr << error_json(fleet::to_string(e.kind()), e.what()) << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << error_json("internal", e.what()) << '\n';
    return 1;
  }
  return 0;
}
