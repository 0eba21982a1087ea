#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "fleet/decision.hpp"
#include "fleet/network.hpp"
#include "fleet/neural.hpp"
#include "fleet/policy.hpp"
#include "fleet/ppo.hpp"
#include "fleet/sim.hpp"

namespace fleet {

// Flat "key = value" file; '#' starts a comment. Keys are case-sensitive.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in, const std::string& source = "<config>");
  static KeyValueConfig load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  // Keys never read through a getter; lets callers reject typos.
  std::vector<std::string> unused_keys() const;
  const std::string& source() const noexcept { return source_; }

 private:
  std::map<std::string, std::string> values_;
  mutable std::map<std::string, bool> used_;
  std::string source_;
};

struct Scenario {
  SimConfig sim;
  std::size_t k = 4;
  double speed_mph = 10.0;
  std::filesystem::path distance_path;
  std::filesystem::path interarrival_path;
  std::string policy = "maxweight";
  std::filesystem::path weights_path;
  BackpressureScoreConfig backpressure;
  PPOConfig ppo;
  int eval_seeds = 1;
  // How a loaded PPO policy picks destinations at evaluation time.
  DecodeMode ppo_decode = DecodeMode::kGreedy;

  Network network;
  DemandModel demand;
};

// Relative paths resolve against the config file's directory.
Scenario load_scenario(const std::filesystem::path& path);
Scenario scenario_from_config(const KeyValueConfig& cfg, const std::filesystem::path& base_dir);

// none | maxweight | backpressure | proportional | costsensitive | ppo
std::unique_ptr<Policy> make_policy(const std::string& name, const Scenario& scenario);

std::vector<std::string> known_policies();

}  // namespace fleet
