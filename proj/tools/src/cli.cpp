#include "fleet/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "fleet/error.hpp"
#include "fleet/ingest.hpp"
#include "fleet/mincostflow.hpp"
#include "fleet/neural.hpp"
#include "fleet/policy.hpp"
#include "fleet/text.hpp"
#include "fleet/weights.hpp"

namespace fleet::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kMetricFields =
    "passengers_served,passengers_arrived,total_wait,avg_wait,rebalance_trips,total_evmt,avg_evmt,wait_cost";

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path.string());
  return out;
}

std::string metric_values(const EpisodeMetrics& m) {
  std::ostringstream s;
  s << m.passengers_served << ',' << m.passengers_arrived << ',' << m.total_wait << ','
    << format_double(m.avg_wait) << ',' << m.rebalance_trips << ',' << format_double(m.total_evmt)
    << ',' << format_double(m.avg_evmt) << ',' << format_double(m.wait_cost);
  return s.str();
}

nlohmann::ordered_json metrics_json(const EpisodeMetrics& m) {
  nlohmann::ordered_json j;
  j["passengers_served"] = m.passengers_served;
  j["passengers_arrived"] = m.passengers_arrived;
  j["total_wait"] = m.total_wait;
  j["avg_wait"] = m.avg_wait;
  j["rebalance_trips"] = m.rebalance_trips;
  j["total_evmt"] = m.total_evmt;
  j["avg_evmt"] = m.avg_evmt;
  j["wait_cost"] = m.wait_cost;
  return j;
}

template <class F>
double mean_of(const std::vector<SeedMetrics>& runs, F f) {
  if (runs.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : runs) s += f(r.metrics);
  return s / static_cast<double>(runs.size());
}

template <class F>
double sum_of(const std::vector<SeedMetrics>& runs, F f) {
  double s = 0.0;
  for (const auto& r : runs) s += f(r.metrics);
  return s;
}

double to_number(const std::string& s, const fs::path& path, std::size_t line) {
  auto v = parse_double(s);
  if (!v) fail(ErrorKind::kFormat, path.string() + ":" + std::to_string(line) + ": bad number '" + s + "'");
  return *v;
}

void warn(const std::string& msg) { std::cerr << "warning: " << msg << '\n'; }

}  // namespace

double Evaluation::mean_avg_wait() const { return mean_of(runs, [](const auto& m) { return m.avg_wait; }); }
double Evaluation::mean_avg_evmt() const { return mean_of(runs, [](const auto& m) { return m.avg_evmt; }); }
double Evaluation::mean_rebalance_trips() const {
  return mean_of(runs, [](const auto& m) { return static_cast<double>(m.rebalance_trips); });
}
double Evaluation::total_wait_cost() const { return sum_of(runs, [](const auto& m) { return m.wait_cost; }); }
double Evaluation::total_evmt() const { return sum_of(runs, [](const auto& m) { return m.total_evmt; }); }
double Evaluation::total_arrivals() const {
  return sum_of(runs, [](const auto& m) { return static_cast<double>(m.passengers_arrived); });
}

std::vector<std::uint64_t> seed_range(std::uint64_t base, int count) {
  require(count >= 1, "seed count must be positive");
  std::vector<std::uint64_t> out;
  for (int i = 0; i < count; ++i) out.push_back(base + static_cast<std::uint64_t>(i));
  return out;
}

Evaluation evaluate(const Scenario& scenario, const Policy& policy, std::string label,
                    const std::vector<std::uint64_t>& seeds, int threads) {
  Evaluation eval;
  eval.label = std::move(label);
  eval.runs.resize(seeds.size());
  auto run = [&](std::size_t k) {
    SimConfig cfg = scenario.sim;
    cfg.seed = seeds[k];
    const EpisodeResult r = run_episode(cfg, scenario.network, scenario.demand, policy);
    eval.runs[k] = {seeds[k], r.metrics, r.arrival_digest};
  };
  const auto workers = static_cast<std::size_t>(std::clamp<int>(threads, 1, static_cast<int>(seeds.size())));
  if (workers == 1) {
    for (std::size_t k = 0; k < seeds.size(); ++k) run(k);
    return eval;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t k = next++; k < seeds.size(); k = next++) run(k);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return eval;
}

void write_metrics_csv(const fs::path& path, const Evaluation& eval) {
  std::ofstream out = open_out(path);
  out << "seed," << kMetricFields << '\n';
  for (const auto& r : eval.runs) out << r.seed << ',' << metric_values(r.metrics) << '\n';
  out << "mean," << format_double(mean_of(eval.runs, [](const auto& m) { return double(m.passengers_served); }))
      << ',' << format_double(mean_of(eval.runs, [](const auto& m) { return double(m.passengers_arrived); }))
      << ',' << format_double(mean_of(eval.runs, [](const auto& m) { return double(m.total_wait); }))
      << ',' << format_double(eval.mean_avg_wait()) << ',' << format_double(eval.mean_rebalance_trips())
      << ',' << format_double(mean_of(eval.runs, [](const auto& m) { return m.total_evmt; }))
      << ',' << format_double(eval.mean_avg_evmt())
      << ',' << format_double(mean_of(eval.runs, [](const auto& m) { return m.wait_cost; })) << '\n';
}

void write_metrics_json(const fs::path& path, const Evaluation& eval) {
  nlohmann::ordered_json j;
  j["policy"] = eval.label;
  j["runs"] = nlohmann::ordered_json::array();
  for (const auto& r : eval.runs) {
    nlohmann::ordered_json run;
    run["seed"] = r.seed;
    run["arrival_digest"] = r.arrival_digest;
    run["metrics"] = metrics_json(r.metrics);
    j["runs"].push_back(run);
  }
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
}

std::vector<SeedMetrics> read_metrics_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (trim(line) != std::string("seed,") + kMetricFields) {
    fail(ErrorKind::kSchema, path.string() + ": unexpected metrics header");
  }
  std::vector<SeedMetrics> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto f = split_csv_line(line);
    if (f.size() != 9) fail(ErrorKind::kFormat, path.string() + ":" + std::to_string(line_no) + ": expected 9 fields");
    if (f[0] == "mean") continue;
    SeedMetrics s;
    s.seed = static_cast<std::uint64_t>(to_number(f[0], path, line_no));
    EpisodeMetrics& m = s.metrics;
    m.passengers_served = static_cast<long long>(to_number(f[1], path, line_no));
    m.passengers_arrived = static_cast<long long>(to_number(f[2], path, line_no));
    m.total_wait = static_cast<long long>(to_number(f[3], path, line_no));
    m.avg_wait = to_number(f[4], path, line_no);
    m.rebalance_trips = static_cast<long long>(to_number(f[5], path, line_no));
    m.total_evmt = to_number(f[6], path, line_no);
    m.avg_evmt = to_number(f[7], path, line_no);
    m.wait_cost = to_number(f[8], path, line_no);
    out.push_back(s);
  }
  return out;
}

std::vector<ComparisonRow> compare_rows(const std::vector<Evaluation>& evals, const std::string& baseline) {
  auto base = std::find_if(evals.begin(), evals.end(), [&](const Evaluation& e) { return e.label == baseline; });
  if (base == evals.end()) fail(ErrorKind::kInvalidArgument, "baseline '" + baseline + "' is not among the evaluated policies");
  const double base_wait = base->total_wait_cost();
  const double base_evmt = base->total_evmt();
  auto ratio = [](double a, double b) { return b > 0.0 ? a / b : std::nan(""); };
  std::vector<ComparisonRow> rows;
  for (const auto& e : evals) {
    ComparisonRow r;
    r.label = e.label;
    r.avg_wait = e.mean_avg_wait();
    r.rebalance_trips = e.mean_rebalance_trips();
    r.avg_evmt = e.mean_avg_evmt();
    r.rel_wait_cost = ratio(e.total_wait_cost(), base_wait);
    r.rel_evmt = ratio(e.total_evmt(), base_evmt);
    rows.push_back(r);
  }
  return rows;
}

void write_comparison_csv(const fs::path& path, const std::vector<ComparisonRow>& rows) {
  std::ofstream out = open_out(path);
  out << "algorithm,avg_wait,rebalance_trips,avg_evmt,rel_wait_cost,rel_evmt\n";
  for (const auto& r : rows) {
    out << r.label << ',' << format_double(r.avg_wait) << ',' << format_double(r.rebalance_trips) << ','
        << format_double(r.avg_evmt) << ',' << format_double(r.rel_wait_cost) << ','
        << format_double(r.rel_evmt) << '\n';
  }
}

std::vector<ComparisonRow> read_comparison_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (trim(line) != "algorithm,avg_wait,rebalance_trips,avg_evmt,rel_wait_cost,rel_evmt") {
    fail(ErrorKind::kSchema, path.string() + ": unexpected comparison header");
  }
  std::vector<ComparisonRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto f = split_csv_line(line);
    if (f.size() != 6) fail(ErrorKind::kFormat, path.string() + ":" + std::to_string(line_no) + ": expected 6 fields");
    rows.push_back({f[0], to_number(f[1], path, line_no), to_number(f[2], path, line_no),
                    to_number(f[3], path, line_no), to_number(f[4], path, line_no),
                    to_number(f[5], path, line_no)});
  }
  return rows;
}

std::string format_comparison(const std::vector<ComparisonRow>& rows) {
  const std::vector<std::string> head{"Algorithm (alpha)", "Avg. wait (mins)", "Rebalance trips",
                                      "Avg. EVMT", "Rel. cost wait time", "Relative EVMT"};
  std::vector<std::vector<std::string>> cells{head};
  auto fixed = [](double v, int digits) {
    if (std::isnan(v)) return std::string("NA");
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
  };
  for (const auto& r : rows) {
    cells.push_back({r.label, fixed(r.avg_wait, 2), fixed(r.rebalance_trips, 0), fixed(r.avg_evmt, 2),
                     fixed(r.rel_wait_cost, 2), fixed(r.rel_evmt, 2)});
  }
  std::vector<std::size_t> width(head.size(), 0);
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c == 0) {
        out << std::left << std::setw(static_cast<int>(width[c])) << row[c];
      } else {
        out << "  " << std::right << std::setw(static_cast<int>(width[c])) << row[c];
      }
    }
    out << '\n';
  }
  return out.str();
}

std::string format_alpha(double alpha) {
  if (alpha > 0.0) {
    const double e = std::round(std::log10(alpha));
    if (std::abs(alpha - std::pow(10.0, e)) <= 1e-12 * alpha) return "1e" + std::to_string(static_cast<int>(e));
  }
  return format_double(alpha);
}

std::string policy_label(const std::string& name, double alpha) {
  if (name == "none") return "None";
  if (name == "maxweight") return "MaxWeight";
  if (name == "backpressure") return "BackPressure";
  if (name == "proportional") return "Proportional";
  if (name == "costsensitive") return "CostSensitive";
  if (name == "ppo") return "PPO(" + format_alpha(alpha) + ")";
  return name;
}

std::string error_json(std::string_view kind, std::string_view message) {
  nlohmann::json j;
  j["error"]["kind"] = kind;
  j["error"]["message"] = message;
  return j.dump();
}

Scenario load(const GlobalOptions& global) {
  if (global.config.empty()) fail(ErrorKind::kInvalidArgument, "--config is required");
  KeyValueConfig cfg = KeyValueConfig::load(global.config);
  if (global.seed) cfg.set("seed", std::to_string(*global.seed));
  return scenario_from_config(cfg, global.config.parent_path());
}

// --- ingest ------------------------------------------------------------------

namespace {

std::int64_t parse_clock(const std::string& s) {
  auto colon = s.find(':');
  auto h = parse_int(s.substr(0, colon));
  auto m = colon == std::string::npos ? std::optional<long long>(0) : parse_int(s.substr(colon + 1));
  if (!h || !m || *h < 0 || *h > 24 || *m < 0 || *m > 59) {
    fail(ErrorKind::kInvalidArgument, "bad clock time '" + s + "' (want HH:MM)");
  }
  return *h * 3600 + *m * 60;
}

std::int64_t require_date(const std::string& s) {
  auto d = parse_date(s);
  if (!d) fail(ErrorKind::kInvalidArgument, "bad date '" + s + "' (want YYYY-MM-DD)");
  return *d;
}

}  // namespace

int cmd_ingest(const GlobalOptions& global, IngestOptions opts) {
  ColumnMap columns;
  std::optional<SurchargeRules> surcharges;
  if (!global.config.empty()) {
    // Optional ingest config: column.<field> = header name, surcharge.<field> = amount,
    // plus defaults for the command-line options.
    const KeyValueConfig cfg = KeyValueConfig::load(global.config);
    const fs::path base = global.config.parent_path();
    auto col = [&](const char* key, std::string& field) { field = cfg.get(std::string("column.") + key, field); };
    col("pickup_time", columns.pickup_time);
    col("dropoff_time", columns.dropoff_time);
    col("pickup_zone", columns.pickup_zone);
    col("dropoff_zone", columns.dropoff_zone);
    col("distance", columns.distance);
    col("passengers", columns.passengers);
    col("rate_code", columns.rate_code);
    col("fare", columns.fare);
    col("total", columns.total);
    col("vendor", columns.vendor);
    col("mta_tax", columns.mta_tax);
    col("improvement_surcharge", columns.improvement_surcharge);
    col("congestion_surcharge", columns.congestion_surcharge);
    SurchargeRules rules;
    auto amount = [&](const char* key, std::optional<double>& field) {
      const std::string k = std::string("surcharge.") + key;
      if (cfg.has(k)) field = cfg.get_double(k, 0.0);
    };
    amount("mta_tax", rules.mta_tax);
    amount("improvement_surcharge", rules.improvement_surcharge);
    amount("congestion_surcharge", rules.congestion_surcharge);
    if (rules.mta_tax || rules.improvement_surcharge || rules.congestion_surcharge) surcharges = rules;
    if (opts.input.empty() && cfg.has("input")) opts.input = base / cfg.get("input", "");
    if (opts.zones.empty() && cfg.has("zones")) opts.zones = base / cfg.get("zones", "");
    opts.window = cfg.get("window", opts.window);
    if (!opts.first_date && cfg.has("first_date")) opts.first_date = cfg.get("first_date", "");
    if (!opts.last_date && cfg.has("last_date")) opts.last_date = cfg.get("last_date", "");
    opts.weekdays_only = cfg.get_bool("weekdays_only", opts.weekdays_only);
    if (auto extra = cfg.unused_keys(); !extra.empty()) {
      fail(ErrorKind::kFormat, global.config.string() + ": unknown key '" + extra.front() + "'");
    }
  }
  if (opts.input.empty()) fail(ErrorKind::kInvalidArgument, "ingest needs --input");
  if (opts.zones.empty()) fail(ErrorKind::kInvalidArgument, "ingest needs --zones");

  FilterConfig filter;
  const auto dash = opts.window.find('-');
  if (dash == std::string::npos) fail(ErrorKind::kInvalidArgument, "window must look like HH:MM-HH:MM");
  filter.window_start = parse_clock(opts.window.substr(0, dash));
  filter.window_end = parse_clock(opts.window.substr(dash + 1));
  const ZoneIndex zones = read_zone_file(opts.zones);
  filter.zones = zones.zones();
  if (opts.first_date) filter.first_day = require_date(*opts.first_date);
  if (opts.last_date) filter.last_day = require_date(*opts.last_date);
  filter.weekdays_only = opts.weekdays_only;
  filter.surcharges = surcharges;

  const TripTable table = read_trips_csv(opts.input, columns, opts.delimiter);
  for (const auto& e : table.errors) warn(e);
  auto [kept, report] = filter_trips(table, filter);
  if (kept.empty()) warn("no records survived filtering; matrices hold only the no-demand sentinel");

  const fs::path out = global.out_dir;
  fs::create_directories(out);
  const auto labels = zones.labels();
  write_matrix_csv(out / "interarrival.csv", labels, interarrival_matrix(kept, zones));
  write_matrix_csv(out / "triptime.csv", labels, triptime_matrix(kept, zones));
  write_matrix_csv(out / "trip_counts.csv", labels, trip_counts(kept, zones));
  open_out(out / "filter_report.json") << report.to_json() << '\n';
  {
    std::ofstream rank = open_out(out / "demand_ranking.csv");
    rank << "rank,zone,pickups\n";
    std::size_t k = 0;
    for (const auto& d : demand_ranking(kept)) rank << ++k << ',' << d.zone << ',' << d.pickups << '\n';
  }
  for (int z : opts.qq_zones) {
    const auto gaps = pickup_gaps(kept, z);
    std::size_t count = 0;
    for (const auto& g : gaps) count += g.gaps.size();
    if (count < 10) {
      warn("zone " + std::to_string(z) + " has " + std::to_string(count) + " gaps; skipping exponential fit");
      continue;
    }
    const ExpFit fit = exp_fit_quantiles(gaps, opts.quantiles);
    std::ofstream qq = open_out(out / ("qq_" + std::to_string(z) + ".csv"));
    qq << "probability,empirical,theoretical\n";
    for (std::size_t k = 0; k < fit.probabilities.size(); ++k) {
      qq << format_double(fit.probabilities[k]) << ',' << format_double(fit.empirical[k]) << ','
         << format_double(fit.theoretical[k]) << '\n';
    }
    std::ofstream dm = open_out(out / ("day_means_" + std::to_string(z) + ".csv"));
    dm << "date,mean_gap\n";
    for (const auto& [d, m] : fit.day_means) dm << format_date(d) << ',' << format_double(m) << '\n';
    std::cout << "zone " << z << ": fitted rate " << format_double(fit.rate) << "/s\n";
  }
  std::cout << report.to_json() << '\n';
  return 0;
}

// --- simulate ------------------------------------------------------------------

int cmd_simulate(const GlobalOptions& global, const SimulateOptions& opts) {
  Scenario s = load(global);
  if (opts.policy) s.policy = *opts.policy;
  if (opts.weights) s.weights_path = *opts.weights;
  const auto seeds = seed_range(s.sim.seed, opts.seeds.value_or(s.eval_seeds));

  std::unique_ptr<Policy> policy;
  std::ofstream dump;
  std::mutex dump_mutex;
  int threads = global.threads;
  if (opts.dump_mcf) {
    if (s.policy != "costsensitive") fail(ErrorKind::kInvalidArgument, "--dump-mcf needs policy costsensitive");
    dump = open_out(*opts.dump_mcf);
    threads = 1;  // keeps the dump in seed order
    policy = std::make_unique<CostSensitivePolicy>([&](const CostSensitiveTrace& t) {
      nlohmann::json j;
      j["v_desired"] = t.v_desired;
      j["instance"] = t.instance;
      j["solution"] = t.solution;
      std::lock_guard lock(dump_mutex);
      dump << j.dump() << '\n';
    });
  } else {
    policy = make_policy(s.policy, s);
  }

  const Evaluation eval = evaluate(s, *policy, policy_label(s.policy, s.sim.alpha), seeds, threads);
  write_metrics_csv(global.out_dir / "metrics.csv", eval);
  write_metrics_json(global.out_dir / "metrics.json", eval);
  std::cout << eval.label << ": avg wait " << format_double(eval.mean_avg_wait()) << " min, rebalance trips "
            << format_double(eval.mean_rebalance_trips()) << ", avg EVMT " << format_double(eval.mean_avg_evmt())
            << " mi over " << seeds.size() << " seed(s)\n";
  return 0;
}

// --- train -----------------------------------------------------------------------

TrainState train_policy(const Scenario& scenario, const fs::path& dir, int checkpoint_every, bool resume,
                        int threads, bool verbose) {
  require(checkpoint_every >= 1, "checkpoint interval must be positive");
  fs::create_directories(dir);
  PPOConfig cfg = scenario.ppo;
  cfg.threads = threads;
  const fs::path ckpt = dir / "checkpoint.bin";
  const fs::path diag = dir / "diagnostics.csv";

  TrainState st = resume && fs::exists(ckpt) ? load_checkpoint(ckpt, cfg) : init_train_state(cfg, scenario.network.size());
  if (st.policy.input_size() != scenario.network.size()) {
    fail(ErrorKind::kInvalidArgument, ckpt.string() + " was trained on a different network");
  }

  // Keep diagnostics rows from before the checkpoint so a resumed run
  // produces the same file layout as an uninterrupted one.
  std::vector<std::string> kept_rows;
  if (st.iteration > 0 && fs::exists(diag)) {
    std::ifstream in(diag);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      auto it = parse_int(split_csv_line(line).front());
      if (it && *it < st.iteration) kept_rows.push_back(line);
    }
  }
  std::ofstream out = open_out(diag);
  out << "iteration,mean_reward,policy_loss,value_loss,mean_kl,wall_seconds\n";
  for (const auto& r : kept_rows) out << r << '\n';
  out.flush();

  const int total = cfg.iterations;
  train(st, cfg, scenario.sim, scenario.network, scenario.demand, [&](const TrainState& state, const IterationStats& it) {
    out << it.iteration << ',' << format_double(it.mean_reward) << ',' << format_double(it.policy_loss) << ','
        << format_double(it.value_loss) << ',' << format_double(it.mean_kl) << ','
        << format_double(it.wall_seconds) << '\n';
    out.flush();
    if (state.iteration % checkpoint_every == 0 || state.iteration == total) {
      save_checkpoint(state, ckpt);
      save_weights(state.policy, dir / "policy.weights");
    }
    if (verbose) {
      std::cerr << "iteration " << it.iteration + 1 << "/" << total << " mean reward "
                << format_double(it.mean_reward) << " kl " << format_double(it.mean_kl) << '\n';
    }
  });
  save_weights(st.policy, dir / "policy.weights");
  save_weights(st.value, dir / "value.weights");
  return st;
}

int cmd_train(const GlobalOptions& global, const TrainOptions& opts) {
  Scenario s = load(global);
  if (opts.iterations) s.ppo.iterations = *opts.iterations;
  s.ppo.validate();
  const TrainState st = train_policy(s, global.out_dir, opts.checkpoint_every, opts.resume, global.threads, true);
  std::cout << "trained " << st.iteration << " iteration(s); weights in "
            << (global.out_dir / "policy.weights").string() << '\n';
  return 0;
}

// --- compare -----------------------------------------------------------------------

namespace {

void check_same_arrivals(const std::vector<Evaluation>& evals) {
  for (const auto& e : evals) {
    for (std::size_t k = 0; k < e.runs.size(); ++k) {
      if (e.runs[k].arrival_digest != evals.front().runs[k].arrival_digest) {
        fail(ErrorKind::kNumeric, "arrival streams differ between " + evals.front().label + " and " + e.label +
                                      " for seed " + std::to_string(e.runs[k].seed));
      }
    }
  }
}

void emit_table(const fs::path& dir, const std::string& stem, const std::vector<ComparisonRow>& rows) {
  write_comparison_csv(dir / (stem + ".csv"), rows);
  const std::string text = format_comparison(rows);
  open_out(dir / (stem + ".txt")) << text;
  std::cout << text;
}

}  // namespace

int cmd_compare(const GlobalOptions& global, const CompareOptions& opts) {
  Scenario s = load(global);
  if (opts.weights) s.weights_path = *opts.weights;
  std::vector<std::string> names = opts.policies;
  if (names.empty()) {
    names = {"maxweight", "backpressure", "proportional", "costsensitive", "none"};
    if (!s.weights_path.empty()) names.insert(names.begin(), "ppo");
  }
  if (std::find(names.begin(), names.end(), opts.baseline) == names.end()) names.push_back(opts.baseline);
  const auto seeds = seed_range(s.sim.seed, opts.seeds.value_or(s.eval_seeds));

  std::vector<Evaluation> evals;
  for (const auto& name : names) {
    const auto policy = make_policy(name, s);
    evals.push_back(evaluate(s, *policy, policy_label(name, s.sim.alpha), seeds, global.threads));
    write_metrics_csv(global.out_dir / ("metrics_" + name + ".csv"), evals.back());
  }
  check_same_arrivals(evals);
  emit_table(global.out_dir, "comparison", compare_rows(evals, policy_label(opts.baseline, s.sim.alpha)));
  return 0;
}

// --- sweep-alpha ---------------------------------------------------------------------

int cmd_sweep_alpha(const GlobalOptions& global, const SweepOptions& opts) {
  Scenario s = load(global);
  if (opts.iterations) s.ppo.iterations = *opts.iterations;
  std::vector<double> alphas = opts.alphas;
  if (alphas.empty()) fail(ErrorKind::kInvalidArgument, "sweep-alpha needs at least one alpha");
  std::sort(alphas.begin(), alphas.end());
  alphas.erase(std::unique(alphas.begin(), alphas.end()), alphas.end());
  const auto seeds = seed_range(s.sim.seed, opts.seeds.value_or(s.eval_seeds));

  // Benchmarks never read alpha, so one baseline run serves every point.
  const auto baseline_policy = make_policy("maxweight", s);
  const Evaluation baseline = evaluate(s, *baseline_policy, "MaxWeight", seeds, global.threads);

  std::vector<Evaluation> evals{baseline};
  for (double alpha : alphas) {
    Scenario sa = s;
    sa.sim.alpha = alpha;
    const fs::path dir = global.out_dir / ("alpha_" + format_alpha(alpha));
    const fs::path weights = dir / "policy.weights";
    if (!(opts.reuse && fs::exists(weights))) {
      std::cerr << "training alpha " << format_alpha(alpha) << '\n';
      train_policy(sa, dir, std::max(1, sa.ppo.iterations), false, global.threads, false);
    }
    sa.weights_path = weights;
    const auto policy = make_policy("ppo", sa);
    evals.push_back(evaluate(sa, *policy, policy_label("ppo", alpha), seeds, global.threads));
    write_metrics_csv(dir / "metrics.csv", evals.back());
  }
  check_same_arrivals(evals);

  const auto rows = compare_rows(evals, "MaxWeight");
  emit_table(global.out_dir, "sweep_comparison", rows);
  std::ofstream trade = open_out(global.out_dir / "tradeoff.csv");
  trade << "alpha,rel_wait_cost,rel_evmt\n";
  for (std::size_t k = 0; k < alphas.size(); ++k) {
    trade << format_double(alphas[k]) << ',' << format_double(rows[k + 1].rel_wait_cost) << ','
          << format_double(rows[k + 1].rel_evmt) << '\n';
  }
  return 0;
}

}  // namespace fleet::cli
