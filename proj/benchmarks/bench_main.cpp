#include <benchmark/benchmark.h>

#include <filesystem>

#include "fleet/mincostflow.hpp"
#include "fleet/mlp.hpp"
#include "fleet/policy.hpp"
#include "fleet/scenario.hpp"
#include "fleet/sim.hpp"

namespace {

const fleet::Scenario& fixture() {
  static const fleet::Scenario s =
      fleet::load_scenario(std::filesystem::path(FLEET_BENCH_DATA_DIR) / "fixture20" / "scenario.cfg");
  return s;
}

// One simulated hour on the 20-station fixture per iteration.
void BM_EpisodeHour(benchmark::State& state, const char* policy_name) {
  const fleet::Scenario& s = fixture();
  const auto policy = fleet::make_policy(policy_name, s);
  fleet::SimConfig cfg = s.sim;
  cfg.episode_length = 3600;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fleet::run_episode(cfg, s.network, s.demand, *policy).metrics);
  }
  state.SetItemsProcessed(state.iterations() * cfg.episode_length);
}
BENCHMARK_CAPTURE(BM_EpisodeHour, none, "none")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_EpisodeHour, maxweight, "maxweight")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_EpisodeHour, costsensitive, "costsensitive")->Unit(benchmark::kMillisecond);

void BM_MlpForwardBackward(benchmark::State& state) {
  const auto width = static_cast<std::size_t>(state.range(0));
  const auto batch = static_cast<Eigen::Index>(state.range(1));
  fleet::Rng rng(1);
  const fleet::Mlp net = fleet::Mlp::uniform({20, width, width, 20}, rng);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(20, batch);
  const Eigen::MatrixXd g = Eigen::MatrixXd::Random(20, batch);
  std::vector<double> grad(net.parameter_count());
  fleet::Mlp::Cache cache;
  for (auto _ : state) {
    net.forward(x, &cache);
    net.backward(cache, g, grad);
    benchmark::DoNotOptimize(grad.data());
  }
}
BENCHMARK(BM_MlpForwardBackward)->Args({64, 128})->Args({256, 128})->Unit(benchmark::kMicrosecond);

void BM_Transportation(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  fleet::Rng rng(2);
  std::uniform_int_distribution<std::int64_t> amount(0, 50), price(1, 1500);
  fleet::TransportationInstance inst;
  inst.supplies.resize(n);
  inst.demands.resize(n);
  for (auto& v : inst.supplies) v = amount(rng);
  for (auto& v : inst.demands) v = amount(rng);
  inst.cost = fleet::Matrix<std::int64_t>(n, n);
  for (auto& c : inst.cost.values()) c = price(rng);
  for (auto _ : state) benchmark::DoNotOptimize(fleet::solve_transportation(inst).total_cost);
}
BENCHMARK(BM_Transportation)->Arg(5)->Arg(10)->Arg(20)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
