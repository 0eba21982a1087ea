#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "fleet/adam.hpp"
#include "fleet/mlp.hpp"
#include "fleet/network.hpp"
#include "fleet/neural.hpp"
#include "fleet/sim.hpp"

namespace fleet {

struct PPOConfig {
  int iterations = 2000;
  int batch_size = 4000;  // decision epochs sampled per iteration (T)
  int minibatch_size = 128;
  int epochs = 30;  // passes over the batch per iteration (K), in shuffled minibatches
  double gamma = 0.99;      // per decision epoch
  double gae_lambda = 0.95;
  double clip = 0.2;
  double learning_rate = 3e-4;
  std::size_t hidden_units = 256;
  std::size_t hidden_layers = 2;
  int samplers = 1;
  int threads = 1;
  double reward_scale = 0.0;  // rewards are divided by this; <= 0 means station count
  bool normalize_advantages = true;
  std::uint64_t seed = 0;

  void validate() const;
};

/// One decision epoch as seen by the learner.
struct Sample {
  std::vector<double> observation;
  std::vector<std::size_t> action;  // dest per station
  std::vector<double> old_scores;   // sampling policy's output, for ratios and KL
  double log_prob = 0.0;            // joint, under the sampling policy
  double reward = 0.0;              // raw, unscaled
  double value = 0.0;
  double advantage = 0.0;
  double target = 0.0;  // GAE return
};

struct PPOBatch {
  std::vector<Sample> samples;
  std::vector<double> episode_rewards;  // totals of episodes completed in the batch
  double mean_episode_reward = 0.0;
};

/// Samples cfg.batch_size epochs under a frozen policy, split across
/// cfg.samplers independent episode streams (run on up to cfg.threads
/// threads), and fills in advantages and targets. Deterministic in
/// (cfg.seed, iteration, cfg.samplers); the thread count does not matter.
PPOBatch collect_batch(const Mlp& policy, const Mlp& value, const PPOConfig& cfg,
                       const SimConfig& sim, const Network& network,
                       const DemandModel& demand, int iteration);

struct LossResult {
  double loss = 0.0;
  std::vector<double> gradient;  // d loss / d parameters
  double clip_fraction = 0.0;
  std::size_t rejected = 0;  // samples dropped for a non-finite ratio
};

/// -mean(min(r * A, clip(r, 1 - eps, 1 + eps) * A)) with r = exp(logp_new -
/// logp_old) over the joint (per-station factorised) action.
LossResult clipped_surrogate_loss(const Mlp& policy, const NeighborhoodHead& head,
                                  std::span<const Sample* const> minibatch, double clip,
                                  bool normalize_advantages);

/// mean((V(s) - target)^2).
LossResult value_loss(const Mlp& value, std::span<const Sample* const> minibatch);

struct IterationStats {
  int iteration = 0;
  double mean_reward = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double mean_kl = 0.0;
  double wall_seconds = 0.0;
  int episodes = 0;
  int skipped_updates = 0;
};

struct TrainState {
  Mlp policy;
  Mlp value;
  Adam policy_opt;
  Adam value_opt;
  int iteration = 0;  // iterations completed
};

TrainState init_train_state(const PPOConfig& cfg, std::size_t stations);

IterationStats train_iteration(TrainState& state, const PPOConfig& cfg, const SimConfig& sim,
                               const Network& network, const DemandModel& demand);

using IterationCallback = std::function<void(const TrainState&, const IterationStats&)>;

/// Runs iterations until state.iteration == cfg.iterations. Every random
/// draw is keyed on (seed, iteration), so resuming a checkpoint reproduces
/// the uninterrupted run exactly.
std::vector<IterationStats> train(TrainState& state, const PPOConfig& cfg, const SimConfig& sim,
                                  const Network& network, const DemandModel& demand,
                                  const IterationCallback& on_iteration = {});

void save_checkpoint(const TrainState& state, const std::filesystem::path& path);
TrainState load_checkpoint(const std::filesystem::path& path, const PPOConfig& cfg);

}  // namespace fleet
