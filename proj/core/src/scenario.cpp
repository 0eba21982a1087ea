#include "fleet/scenario.hpp"

#include <fstream>
#include <sstream>

#include "fleet/error.hpp"
#include "fleet/neural.hpp"
#include "fleet/text.hpp"
#include "fleet/weights.hpp"

namespace fleet {

KeyValueConfig KeyValueConfig::parse(std::istream& in, const std::string& source) {
  KeyValueConfig cfg;
  cfg.source_ = source;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view body = trim(std::string_view(line).substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      fail(ErrorKind::kFormat, source + ":" + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key(trim(body.substr(0, eq)));
    if (key.empty()) fail(ErrorKind::kFormat, source + ":" + std::to_string(line_no) + ": empty key");
    if (cfg.values_.count(key)) {
      fail(ErrorKind::kFormat, source + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    cfg.values_[key] = std::string(trim(body.substr(eq + 1)));
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  return parse(in, path.string());
}

std::string KeyValueConfig::get(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  used_[key] = true;
  return it->second;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  if (!has(key)) return fallback;
  const std::string raw = get(key, "");
  auto v = parse_double(raw);
  if (!v || std::isnan(*v)) fail(ErrorKind::kFormat, source_ + ": '" + key + "' is not a number: " + raw);
  return *v;
}

long long KeyValueConfig::get_int(const std::string& key, long long fallback) const {
  if (!has(key)) return fallback;
  const std::string raw = get(key, "");
  auto v = parse_int(raw);
  if (!v) fail(ErrorKind::kFormat, source_ + ": '" + key + "' is not an integer: " + raw);
  return *v;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string raw = get(key, "");
  if (raw == "true" || raw == "1" || raw == "yes") return true;
  if (raw == "false" || raw == "0" || raw == "no") return false;
  fail(ErrorKind::kFormat, source_ + ": '" + key + "' is not a boolean: " + raw);
}

std::vector<std::string> KeyValueConfig::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [key, value] : values_) {
    if (!used_.count(key)) out.push_back(key);
  }
  return out;
}

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return {};
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

Scenario scenario_from_config(const KeyValueConfig& cfg, const std::filesystem::path& base_dir) {
  Scenario s;
  s.sim.fleet_size = static_cast<int>(cfg.get_int("fleet_size", s.sim.fleet_size));
  s.sim.dpr = cfg.get_double("dpr", s.sim.dpr);
  s.sim.alpha = cfg.get_double("alpha", s.sim.alpha);
  s.sim.seed = static_cast<std::uint64_t>(cfg.get_int("seed", static_cast<long long>(s.sim.seed)));
  s.sim.episode_length = static_cast<int>(cfg.get_int("episode_length", s.sim.episode_length));
  s.sim.rebalance_interval = static_cast<int>(cfg.get_int("rebalance_interval", s.sim.rebalance_interval));
  s.k = static_cast<std::size_t>(cfg.get_int("k", static_cast<long long>(s.k)));
  s.speed_mph = cfg.get_double("speed", s.speed_mph);
  s.distance_path = resolve(base_dir, cfg.get("distance", ""));
  s.interarrival_path = resolve(base_dir, cfg.get("interarrival", ""));
  s.policy = cfg.get("policy", s.policy);
  s.weights_path = resolve(base_dir, cfg.get("weights", ""));
  s.backpressure.c = cfg.get_double("backpressure_c", s.backpressure.c);
  s.eval_seeds = static_cast<int>(cfg.get_int("eval_seeds", s.eval_seeds));
  if (const std::string decode = cfg.get("ppo.decode", "greedy"); decode == "sample") {
    s.ppo_decode = DecodeMode::kSample;
  } else if (decode != "greedy") {
    fail(ErrorKind::kFormat, cfg.source() + ": 'ppo.decode' must be greedy or sample, got " + decode);
  }

  PPOConfig& p = s.ppo;
  p.iterations = static_cast<int>(cfg.get_int("ppo.iterations", p.iterations));
  p.batch_size = static_cast<int>(cfg.get_int("ppo.batch_size", p.batch_size));
  p.minibatch_size = static_cast<int>(cfg.get_int("ppo.minibatch_size", p.minibatch_size));
  p.epochs = static_cast<int>(cfg.get_int("ppo.epochs", p.epochs));
  p.gamma = cfg.get_double("ppo.gamma", p.gamma);
  p.gae_lambda = cfg.get_double("ppo.gae_lambda", p.gae_lambda);
  p.clip = cfg.get_double("ppo.clip", p.clip);
  p.learning_rate = cfg.get_double("ppo.learning_rate", p.learning_rate);
  p.hidden_units = static_cast<std::size_t>(cfg.get_int("ppo.hidden_units", static_cast<long long>(p.hidden_units)));
  p.hidden_layers = static_cast<std::size_t>(cfg.get_int("ppo.hidden_layers", static_cast<long long>(p.hidden_layers)));
  p.samplers = static_cast<int>(cfg.get_int("ppo.samplers", p.samplers));
  p.reward_scale = cfg.get_double("ppo.reward_scale", p.reward_scale);
  p.normalize_advantages = cfg.get_bool("ppo.normalize_advantages", p.normalize_advantages);
  p.seed = s.sim.seed;

  if (auto extra = cfg.unused_keys(); !extra.empty()) {
    fail(ErrorKind::kFormat, cfg.source() + ": unknown key '" + extra.front() + "'");
  }
  s.sim.validate();
  p.validate();
  require(s.eval_seeds >= 1, "eval_seeds must be positive");
  if (s.distance_path.empty()) fail(ErrorKind::kFormat, cfg.source() + ": 'distance' is required");
  if (s.interarrival_path.empty()) fail(ErrorKind::kFormat, cfg.source() + ": 'interarrival' is required");

  const LabeledMatrix distance = read_matrix_csv(s.distance_path);
  const LabeledMatrix interarrival = read_matrix_csv(s.interarrival_path);
  if (distance.labels != interarrival.labels) {
    fail(ErrorKind::kSchema, "station labels differ between " + s.distance_path.string() + " and " +
                                 s.interarrival_path.string());
  }
  s.network = build_network(distance.values, s.speed_mph, s.k, distance.labels);
  s.demand = demand_from_interarrival(interarrival.values);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  return scenario_from_config(KeyValueConfig::load(path), path.parent_path());
}

std::vector<std::string> known_policies() {
  return {"none", "maxweight", "backpressure", "proportional", "costsensitive", "ppo"};
}

std::unique_ptr<Policy> make_policy(const std::string& name, const Scenario& scenario) {
  if (name == "none") return std::make_unique<NoRebalancePolicy>();
  if (name == "maxweight") return std::make_unique<MaxWeightPolicy>();
  if (name == "backpressure") return std::make_unique<BackPressurePolicy>(scenario.backpressure);
  if (name == "proportional") return std::make_unique<ProportionalPolicy>();
  if (name == "costsensitive") return std::make_unique<CostSensitivePolicy>();
  if (name == "ppo") {
    if (scenario.weights_path.empty()) fail(ErrorKind::kInvalidArgument, "policy 'ppo' needs a weights file");
    Mlp net = load_weights(scenario.weights_path);
    if (net.input_size() != scenario.network.size() || net.output_size() != scenario.network.size()) {
      fail(ErrorKind::kInvalidArgument, scenario.weights_path.string() + " does not match a " +
                                            std::to_string(scenario.network.size()) + "-station network");
    }
    return std::make_unique<NeuralPolicy>(std::move(net), scenario.ppo_decode);
  }
  fail(ErrorKind::kInvalidArgument, "unknown policy '" + name + "'");
}

}  // namespace fleet
