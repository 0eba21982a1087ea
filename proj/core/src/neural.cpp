#include "fleet/neural.hpp"

#include <algorithm>
#include <cmath>

#include "fleet/error.hpp"

namespace fleet {

NeighborhoodHead::NeighborhoodHead(const Network& network) {
  options_.resize(network.size());
  for (std::size_t i = 0; i < network.size(); ++i) {
    options_[i].push_back(i);
    options_[i].insert(options_[i].end(), network.neighbors[i].begin(), network.neighbors[i].end());
  }
}

void NeighborhoodHead::log_probs(std::span<const double> scores, std::size_t i,
                                 std::span<double> out) const {
  const auto& opts = options_[i];
  double top = -INFINITY;
  for (std::size_t o : opts) top = std::max(top, scores[o]);
  double norm = 0.0;
  for (std::size_t o : opts) norm += std::exp(scores[o] - top);
  const double log_norm = top + std::log(norm);
  for (std::size_t k = 0; k < opts.size(); ++k) out[k] = scores[opts[k]] - log_norm;
}

double NeighborhoodHead::log_prob(std::span<const double> scores, std::size_t i,
                                  std::size_t dest) const {
  const auto& opts = options_[i];
  auto it = std::find(opts.begin(), opts.end(), dest);
  require(it != opts.end(), "destination is not an option for this station");
  std::vector<double> lp(opts.size());
  log_probs(scores, i, lp);
  return lp[static_cast<std::size_t>(it - opts.begin())];
}

double NeighborhoodHead::joint_log_prob(std::span<const double> scores,
                                        std::span<const std::size_t> dest) const {
  require(dest.size() == stations(), "action length does not match station count");
  double total = 0.0;
  for (std::size_t i = 0; i < dest.size(); ++i) total += log_prob(scores, i, dest[i]);
  return total;
}

void NeighborhoodHead::add_joint_log_prob_grad(std::span<const double> scores,
                                               std::span<const std::size_t> dest, double weight,
                                               std::span<double> grad) const {
  std::vector<double> lp(option_count());
  for (std::size_t i = 0; i < stations(); ++i) {
    const auto& opts = options_[i];
    log_probs(scores, i, lp);
    for (std::size_t k = 0; k < opts.size(); ++k) {
      const double indicator = opts[k] == dest[i] ? 1.0 : 0.0;
      grad[opts[k]] += weight * (indicator - std::exp(lp[k]));
    }
  }
}

double NeighborhoodHead::kl(std::span<const double> old_scores,
                            std::span<const double> new_scores) const {
  std::vector<double> lp_old(option_count());
  std::vector<double> lp_new(option_count());
  double total = 0.0;
  for (std::size_t i = 0; i < stations(); ++i) {
    log_probs(old_scores, i, lp_old);
    log_probs(new_scores, i, lp_new);
    for (std::size_t k = 0; k < options_[i].size(); ++k) {
      total += std::exp(lp_old[k]) * (lp_old[k] - lp_new[k]);
    }
  }
  return total;
}

double NeuralDecision::joint_log_prob() const {
  double total = 0.0;
  for (double lp : log_probs) total += lp;
  return total;
}

NeuralDecision neural_decide(const FleetState& state, const Network& network,
                             const Mlp& policy_net, DecodeMode mode, Rng& rng) {
  const std::size_t n = network.size();
  const std::vector<double> obs = observe(state);
  NeuralDecision out;
  out.scores = policy_net.forward(obs);
  if (out.scores.size() != n) {
    fail(ErrorKind::kInvalidArgument, "policy network emits " + std::to_string(out.scores.size()) +
                                          " scores for " + std::to_string(n) + " stations");
  }
  const NeighborhoodHead head(network);
  out.action.dest.resize(n);
  out.log_probs.resize(n);
  std::vector<double> lp(head.option_count());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    head.log_probs(out.scores, i, lp);
    std::size_t pick = 0;
    if (mode == DecodeMode::kGreedy) {
      pick = static_cast<std::size_t>(std::max_element(lp.begin(), lp.end()) - lp.begin());
    } else {
      const double u = unit(rng);
      double cum = 0.0;
      pick = lp.size() - 1;
      for (std::size_t k = 0; k < lp.size(); ++k) {
        cum += std::exp(lp[k]);
        if (u < cum) {
          pick = k;
          break;
        }
      }
    }
    out.action.dest[i] = head.options(i)[pick];
    out.log_probs[i] = lp[pick];
  }
  return out;
}

PolicyDecision NeuralPolicy::decide(const DecisionContext& ctx) const {
  const NeuralDecision d = neural_decide(ctx.state, ctx.network, net_, mode_, ctx.rng);
  return from_dispatch_matrix(expand_action(ctx.state, ctx.network, d.action, ctx.config.dpr));
}

}  // namespace fleet
