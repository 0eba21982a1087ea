#include "fleet/ppo.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include "fleet/error.hpp"
#include "fleet/gae.hpp"
#include "fleet/weights.hpp"

namespace fleet {

void PPOConfig::validate() const {
  require(iterations >= 0, "iterations must be nonnegative");
  require(batch_size >= 1, "batch_size must be positive");
  require(minibatch_size >= 1, "minibatch_size must be positive");
  require(epochs >= 0, "epochs must be nonnegative");
  require(gamma >= 0.0 && gamma <= 1.0, "gamma must lie in [0, 1]");
  require(gae_lambda >= 0.0 && gae_lambda <= 1.0, "GAE lambda must lie in [0, 1]");
  require(clip > 0.0 && clip < 1.0, "clip ratio must lie in (0, 1)");
  require(learning_rate >= 0.0, "learning rate must be nonnegative");
  require(hidden_units >= 1 && hidden_layers >= 1, "hidden layers need at least one unit");
  require(samplers >= 1 && samplers <= batch_size, "samplers must lie in [1, batch_size]");
  require(threads >= 1, "threads must be positive");
}

namespace {

double effective_scale(const PPOConfig& cfg, std::size_t stations) {
  return cfg.reward_scale > 0.0 ? cfg.reward_scale : static_cast<double>(stations);
}

struct SamplerOutput {
  std::vector<Sample> samples;
  std::vector<double> episode_rewards;
  double reward_sum = 0.0;
};

double value_of(const Mlp& value, const FleetState& state) {
  return value.forward(observe(state)).front();
}

SamplerOutput run_sampler(const Mlp& policy, const Mlp& value, const PPOConfig& cfg,
                          const SimConfig& sim, const Network& network,
                          const DemandModel& demand, int iteration, int sampler, int quota) {
  SamplerOutput out;
  out.samples.reserve(static_cast<std::size_t>(quota));
  const double scale = effective_scale(cfg, network.size());
  Rng rng = make_rng(cfg.seed, Stream::kPolicy, static_cast<std::uint64_t>(iteration),
                     static_cast<std::uint64_t>(sampler));

  std::uint64_t episode_index = 0;
  auto next_episode = [&] {
    const std::uint64_t seed = derive_seed(cfg.seed, {static_cast<std::uint64_t>(iteration),
                                                      static_cast<std::uint64_t>(sampler),
                                                      episode_index++});
    return std::make_unique<Episode>(sim, network, demand, seed);
  };

  std::size_t segment_start = 0;
  auto close_segment = [&](double bootstrap) {
    const std::size_t len = out.samples.size() - segment_start;
    if (len == 0) return;
    std::vector<double> rewards(len);
    std::vector<double> values(len);
    for (std::size_t t = 0; t < len; ++t) {
      rewards[t] = out.samples[segment_start + t].reward / scale;
      values[t] = out.samples[segment_start + t].value;
    }
    const GaeResult gae = gae_advantages(rewards, values, bootstrap, cfg.gamma, cfg.gae_lambda);
    for (std::size_t t = 0; t < len; ++t) {
      out.samples[segment_start + t].advantage = gae.advantages[t];
      out.samples[segment_start + t].target = gae.returns[t];
    }
    segment_start = out.samples.size();
  };

  auto episode = next_episode();
  double episode_reward = 0.0;
  bool has_decision = episode->advance_to_decision();
  while (static_cast<int>(out.samples.size()) < quota) {
    if (!has_decision) {
      // Fixed-length episodes end by truncation, so bootstrap from the final state.
      close_segment(value_of(value, episode->state()));
      out.episode_rewards.push_back(episode_reward);
      episode_reward = 0.0;
      episode = next_episode();
      has_decision = episode->advance_to_decision();
      continue;
    }
    const FleetState& state = episode->state();
    NeuralDecision d = neural_decide(state, network, policy, DecodeMode::kSample, rng);
    Sample s;
    s.observation = observe(state);
    s.value = value.forward(s.observation).front();
    s.log_prob = d.joint_log_prob();
    const Matrix<int> y = expand_action(state, network, d.action, sim.dpr);
    s.action = std::move(d.action.dest);
    s.old_scores = std::move(d.scores);
    s.reward = episode->apply(y).reward;
    episode_reward += s.reward;
    out.reward_sum += s.reward;
    out.samples.push_back(std::move(s));
    has_decision = episode->advance_to_decision();
  }
  close_segment(value_of(value, episode->state()));
  if (!has_decision) out.episode_rewards.push_back(episode_reward);
  return out;
}

Eigen::MatrixXd stack_observations(std::span<const Sample* const> batch) {
  const auto rows = static_cast<Eigen::Index>(batch.front()->observation.size());
  Eigen::MatrixXd x(rows, static_cast<Eigen::Index>(batch.size()));
  for (std::size_t c = 0; c < batch.size(); ++c) {
    x.col(static_cast<Eigen::Index>(c)) =
        Eigen::Map<const Eigen::VectorXd>(batch[c]->observation.data(), rows);
  }
  return x;
}

}  // namespace

PPOBatch collect_batch(const Mlp& policy, const Mlp& value, const PPOConfig& cfg,
                       const SimConfig& sim, const Network& network,
                       const DemandModel& demand, int iteration) {
  cfg.validate();
  std::vector<SamplerOutput> parts(static_cast<std::size_t>(cfg.samplers));
  auto quota = [&](int s) { return cfg.batch_size / cfg.samplers + (s < cfg.batch_size % cfg.samplers ? 1 : 0); };

  const int workers = std::min(cfg.threads, cfg.samplers);
  if (workers <= 1) {
    for (int s = 0; s < cfg.samplers; ++s) {
      parts[s] = run_sampler(policy, value, cfg, sim, network, demand, iteration, s, quota(s));
    }
  } else {
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (int s = next++; s < cfg.samplers; s = next++) {
            parts[s] = run_sampler(policy, value, cfg, sim, network, demand, iteration, s, quota(s));
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    pool.clear();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  PPOBatch batch;
  double reward_sum = 0.0;
  for (auto& p : parts) {
    reward_sum += p.reward_sum;
    batch.episode_rewards.insert(batch.episode_rewards.end(), p.episode_rewards.begin(), p.episode_rewards.end());
    std::move(p.samples.begin(), p.samples.end(), std::back_inserter(batch.samples));
  }
  if (!batch.episode_rewards.empty()) {
    batch.mean_episode_reward = std::accumulate(batch.episode_rewards.begin(), batch.episode_rewards.end(), 0.0) /
                                static_cast<double>(batch.episode_rewards.size());
  } else {
    // No episode finished: extrapolate the per-epoch mean to a full episode.
    const double epochs = std::ceil(static_cast<double>(sim.episode_length) / sim.rebalance_interval);
    batch.mean_episode_reward = reward_sum / static_cast<double>(batch.samples.size()) * epochs;
  }
  return batch;
}

LossResult clipped_surrogate_loss(const Mlp& policy, const NeighborhoodHead& head,
                                  std::span<const Sample* const> minibatch, double clip,
                                  bool normalize_advantages) {
  LossResult out;
  out.gradient.assign(policy.parameter_count(), 0.0);
  if (minibatch.empty()) return out;
  const std::size_t b = minibatch.size();

  std::vector<double> adv(b);
  for (std::size_t s = 0; s < b; ++s) adv[s] = minibatch[s]->advantage;
  if (normalize_advantages && b > 1) {
    const double mean = std::accumulate(adv.begin(), adv.end(), 0.0) / static_cast<double>(b);
    double var = 0.0;
    for (double a : adv) var += (a - mean) * (a - mean);
    const double sd = std::sqrt(var / static_cast<double>(b));
    for (double& a : adv) a = (a - mean) / (sd + 1e-8);
  }

  Mlp::Cache cache;
  const Eigen::MatrixXd scores = policy.forward(stack_observations(minibatch), &cache);
  Eigen::MatrixXd grad_scores = Eigen::MatrixXd::Zero(scores.rows(), scores.cols());

  std::vector<double> ratio(b);
  std::size_t kept = 0;
  for (std::size_t s = 0; s < b; ++s) {
    std::span<const double> col(scores.col(static_cast<Eigen::Index>(s)).data(), static_cast<std::size_t>(scores.rows()));
    const double logp = head.joint_log_prob(col, minibatch[s]->action);
    ratio[s] = std::exp(logp - minibatch[s]->log_prob);
    if (std::isfinite(ratio[s])) ++kept;
  }
  out.rejected = b - kept;
  if (kept == 0) return out;

  std::size_t clipped = 0;
  for (std::size_t s = 0; s < b; ++s) {
    const double r = ratio[s];
    if (!std::isfinite(r)) continue;
    const double a = adv[s];
    const double rc = std::clamp(r, 1.0 - clip, 1.0 + clip);
    out.loss -= std::min(r * a, rc * a);
    // The unclipped branch carries the gradient unless clipping binds.
    const bool active = a >= 0.0 ? r <= 1.0 + clip : r >= 1.0 - clip;
    if (!active) {
      ++clipped;
      continue;
    }
    std::span<const double> col(scores.col(static_cast<Eigen::Index>(s)).data(), static_cast<std::size_t>(scores.rows()));
    std::span<double> gcol(grad_scores.col(static_cast<Eigen::Index>(s)).data(), static_cast<std::size_t>(scores.rows()));
    head.add_joint_log_prob_grad(col, minibatch[s]->action, -a * r / static_cast<double>(kept), gcol);
  }
  out.loss /= static_cast<double>(kept);
  out.clip_fraction = static_cast<double>(clipped) / static_cast<double>(kept);
  policy.backward(cache, grad_scores, out.gradient);
  return out;
}

LossResult value_loss(const Mlp& value, std::span<const Sample* const> minibatch) {
  LossResult out;
  out.gradient.assign(value.parameter_count(), 0.0);
  if (minibatch.empty()) return out;
  const double b = static_cast<double>(minibatch.size());
  Mlp::Cache cache;
  const Eigen::MatrixXd v = value.forward(stack_observations(minibatch), &cache);
  Eigen::MatrixXd g(1, v.cols());
  for (Eigen::Index s = 0; s < v.cols(); ++s) {
    const double err = v(0, s) - minibatch[static_cast<std::size_t>(s)]->target;
    out.loss += err * err / b;
    g(0, s) = 2.0 * err / b;
  }
  value.backward(cache, g, out.gradient);
  return out;
}

TrainState init_train_state(const PPOConfig& cfg, std::size_t stations) {
  cfg.validate();
  Rng rng = make_rng(cfg.seed, Stream::kInit);
  std::vector<std::size_t> policy_sizes{stations};
  for (std::size_t l = 0; l < cfg.hidden_layers; ++l) policy_sizes.push_back(cfg.hidden_units);
  std::vector<std::size_t> value_sizes = policy_sizes;
  policy_sizes.push_back(stations);
  value_sizes.push_back(1);

  TrainState st;
  // Small output weights start the policy near uniform over each neighbourhood.
  st.policy = Mlp::uniform(policy_sizes, rng, 0.01);
  st.value = Mlp::uniform(value_sizes, rng, 1.0);
  const AdamConfig adam{cfg.learning_rate};
  st.policy_opt = Adam(st.policy.parameter_count(), adam);
  st.value_opt = Adam(st.value.parameter_count(), adam);
  return st;
}

IterationStats train_iteration(TrainState& st, const PPOConfig& cfg, const SimConfig& sim,
                               const Network& network, const DemandModel& demand) {
  const auto start = std::chrono::steady_clock::now();
  IterationStats stats;
  stats.iteration = st.iteration;

  PPOBatch batch = collect_batch(st.policy, st.value, cfg, sim, network, demand, st.iteration);
  stats.mean_reward = batch.mean_episode_reward;
  stats.episodes = static_cast<int>(batch.episode_rewards.size());

  const NeighborhoodHead head(network);
  Rng shuffle = make_rng(cfg.seed, Stream::kShuffle, static_cast<std::uint64_t>(st.iteration));
  std::vector<std::size_t> order(batch.samples.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t mb = std::min<std::size_t>(static_cast<std::size_t>(cfg.minibatch_size), order.size());
  int steps = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle);
    for (std::size_t start = 0; start < order.size(); start += mb) {
      const std::size_t end = std::min(start + mb, order.size());
      std::vector<const Sample*> minibatch;
      minibatch.reserve(end - start);
      for (std::size_t i = start; i < end; ++i) minibatch.push_back(&batch.samples[order[i]]);

      const LossResult pl = clipped_surrogate_loss(st.policy, head, minibatch, cfg.clip, cfg.normalize_advantages);
      const LossResult vl = value_loss(st.value, minibatch);
      if (!std::isfinite(pl.loss) || !std::isfinite(vl.loss)) {
        std::ostringstream msg;
        msg << "non-finite loss at iteration " << st.iteration << " epoch " << epoch
            << ": policy_loss=" << pl.loss << " value_loss=" << vl.loss
            << " mean_reward=" << stats.mean_reward << " rejected=" << pl.rejected;
        fail(ErrorKind::kNumeric, msg.str());
      }
      stats.policy_loss += pl.loss;
      stats.value_loss += vl.loss;
      ++steps;
      if (!st.policy_opt.step(st.policy.mutable_parameters(), pl.gradient)) ++stats.skipped_updates;
      if (!st.value_opt.step(st.value.mutable_parameters(), vl.gradient)) ++stats.skipped_updates;
    }
  }
  if (steps > 0) {
    stats.policy_loss /= steps;
    stats.value_loss /= steps;
  }

  if (!batch.samples.empty()) {
    std::vector<const Sample*> all(batch.samples.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = &batch.samples[i];
    const Eigen::MatrixXd fresh = st.policy.forward(stack_observations(all));
    double kl = 0.0;
    for (std::size_t s = 0; s < all.size(); ++s) {
      std::span<const double> col(fresh.col(static_cast<Eigen::Index>(s)).data(), static_cast<std::size_t>(fresh.rows()));
      kl += head.kl(all[s]->old_scores, col);
    }
    stats.mean_kl = kl / static_cast<double>(all.size());
  }

  ++st.iteration;
  stats.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return stats;
}

std::vector<IterationStats> train(TrainState& st, const PPOConfig& cfg, const SimConfig& sim,
                                  const Network& network, const DemandModel& demand,
                                  const IterationCallback& on_iteration) {
  cfg.validate();
  sim.validate();
  require(st.policy.input_size() == network.size() && st.policy.output_size() == network.size(),
          "policy network shape does not match the station count");
  std::vector<IterationStats> history;
  while (st.iteration < cfg.iterations) {
    history.push_back(train_iteration(st, cfg, sim, network, demand));
    if (on_iteration) on_iteration(st, history.back());
  }
  return history;
}

namespace {

constexpr char kCheckpointMagic[4] = {'F', 'C', 'K', 'P'};
constexpr std::uint32_t kCheckpointVersion = 1;

void write_adam(std::ostream& out, const Adam& opt) {
  wire::put_u64(out, opt.steps());
  wire::put_u64(out, opt.first_moment().size());
  for (double m : opt.first_moment()) wire::put_f64(out, m);
  for (double v : opt.second_moment()) wire::put_f64(out, v);
}

void read_adam(std::istream& in, Adam& opt) {
  const std::uint64_t steps = wire::get_u64(in);
  const std::uint64_t count = wire::get_u64(in);
  if (count != opt.first_moment().size()) fail(ErrorKind::kFormat, "checkpoint optimizer size mismatch");
  std::vector<double> m(count);
  std::vector<double> v(count);
  for (double& x : m) x = wire::get_f64(in);
  for (double& x : v) x = wire::get_f64(in);
  opt.restore(steps, std::move(m), std::move(v));
}

}  // namespace

void save_checkpoint(const TrainState& st, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path.string());
  out.write(kCheckpointMagic, 4);
  wire::put_u32(out, kCheckpointVersion);
  wire::put_u64(out, static_cast<std::uint64_t>(st.iteration));
  write_weights(out, st.policy);
  write_weights(out, st.value);
  write_adam(out, st.policy_opt);
  write_adam(out, st.value_opt);
  if (!out) fail(ErrorKind::kIo, "write failed for " + path.string());
}

TrainState load_checkpoint(const std::filesystem::path& path, const PPOConfig& cfg) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  char magic[4] = {};
  if (!in.read(magic, 4) || std::string_view(magic, 4) != std::string_view(kCheckpointMagic, 4)) {
    fail(ErrorKind::kFormat, path.string() + ": not a training checkpoint");
  }
  if (wire::get_u32(in) != kCheckpointVersion) fail(ErrorKind::kFormat, "unsupported checkpoint version");
  TrainState st;
  st.iteration = static_cast<int>(wire::get_u64(in));
  st.policy = read_weights(in);
  st.value = read_weights(in);
  const auto& sizes = st.policy.layer_sizes();
  const bool shape_ok = sizes.size() == cfg.hidden_layers + 2 &&
                        std::all_of(sizes.begin() + 1, sizes.end() - 1,
                                    [&](std::size_t w) { return w == cfg.hidden_units; });
  if (!shape_ok) {
    fail(ErrorKind::kInvalidArgument, path.string() + ": network shape differs from ppo.hidden_units/hidden_layers");
  }
  const AdamConfig adam{cfg.learning_rate};
  st.policy_opt = Adam(st.policy.parameter_count(), adam);
  st.value_opt = Adam(st.value.parameter_count(), adam);
  read_adam(in, st.policy_opt);
  read_adam(in, st.value_opt);
  return st;
}

}  // namespace fleet
