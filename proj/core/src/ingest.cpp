#include "fleet/ingest.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fleet/error.hpp"
#include "fleet/text.hpp"

namespace fleet {

namespace {

using namespace std::chrono;

constexpr std::size_t kMaxReportedErrors = 20;
constexpr double kSentinel = std::numeric_limits<double>::infinity();

std::optional<int> fixed_int(std::string_view s, std::size_t pos, std::size_t len) {
  if (pos + len > s.size()) return std::nullopt;
  int v = 0;
  for (std::size_t k = pos; k < pos + len; ++k) {
    if (s[k] < '0' || s[k] > '9') return std::nullopt;
    v = v * 10 + (s[k] - '0');
  }
  return v;
}

}  // namespace

std::optional<std::int64_t> parse_date(std::string_view s) {
  s = trim(s);
  if (s.size() < 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  auto y = fixed_int(s, 0, 4);
  auto m = fixed_int(s, 5, 2);
  auto d = fixed_int(s, 8, 2);
  if (!y || !m || !d) return std::nullopt;
  const year_month_day ymd{year{*y}, month{static_cast<unsigned>(*m)}, day{static_cast<unsigned>(*d)}};
  if (!ymd.ok()) return std::nullopt;
  return sys_days{ymd}.time_since_epoch().count();
}

std::optional<Timestamp> parse_timestamp(std::string_view s) {
  s = trim(s);
  if (s.size() != 19 || (s[10] != ' ' && s[10] != 'T') || s[13] != ':' || s[16] != ':') {
    return std::nullopt;
  }
  auto day_number = parse_date(s.substr(0, 10));
  auto h = fixed_int(s, 11, 2);
  auto mi = fixed_int(s, 14, 2);
  auto sec = fixed_int(s, 17, 2);
  if (!day_number || !h || !mi || !sec || *h > 23 || *mi > 59 || *sec > 59) return std::nullopt;
  return *day_number * 86400 + *h * 3600 + *mi * 60 + *sec;
}

std::string format_date(std::int64_t day_number) {
  const year_month_day ymd{sys_days{days{day_number}}};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::string format_timestamp(Timestamp t) {
  const std::int64_t sod = second_of_day(t);
  char buf[16];
  std::snprintf(buf, sizeof(buf), " %02d:%02d:%02d", static_cast<int>(sod / 3600),
                static_cast<int>(sod / 60 % 60), static_cast<int>(sod % 60));
  return format_date(day_of(t)) + buf;
}

int weekday_of(std::int64_t day_number) {
  return static_cast<int>(weekday{sys_days{days{day_number}}}.c_encoding());
}

namespace {

struct ColumnPositions {
  std::size_t pickup_time, dropoff_time, pickup_zone, dropoff_zone, distance, passengers,
      rate_code, fare, total, vendor;
  std::optional<std::size_t> mta_tax, improvement, congestion;
};

ColumnPositions locate_columns(const std::vector<std::string>& header, const ColumnMap& c,
                               std::string_view source) {
  auto find = [&](const std::string& name) -> std::optional<std::size_t> {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  auto need = [&](const std::string& name) {
    auto pos = find(name);
    if (!pos) fail(ErrorKind::kSchema, std::string(source) + ": missing column '" + name + "'");
    return *pos;
  };
  ColumnPositions p{need(c.pickup_time), need(c.dropoff_time), need(c.pickup_zone),
                    need(c.dropoff_zone), need(c.distance), need(c.passengers),
                    need(c.rate_code), need(c.fare), need(c.total), need(c.vendor),
                    find(c.mta_tax), find(c.improvement_surcharge), find(c.congestion_surcharge)};
  return p;
}

// Missing integer fields (blank passenger count, rate code) parse as failures.
std::optional<TripRecord> parse_row(const std::vector<std::string>& f, const ColumnPositions& p,
                                    std::string& why) {
  auto ts = [&](std::size_t k, const char* what) -> std::optional<Timestamp> {
    auto v = parse_timestamp(f[k]);
    if (!v) why = std::string("bad ") + what + " '" + f[k] + "'";
    return v;
  };
  auto integer = [&](std::size_t k, const char* what) -> std::optional<int> {
    auto v = parse_int(f[k]);
    if (!v) {
      // Some exports write integral columns as 1.0.
      auto d = parse_double(f[k]);
      if (d && std::isfinite(*d) && *d == std::floor(*d)) return static_cast<int>(*d);
      why = std::string("bad ") + what + " '" + f[k] + "'";
      return std::nullopt;
    }
    return static_cast<int>(*v);
  };
  auto real = [&](std::size_t k, const char* what) -> std::optional<double> {
    auto v = parse_double(f[k]);
    if (!v || std::isnan(*v)) {
      why = std::string("bad ") + what + " '" + f[k] + "'";
      return std::nullopt;
    }
    return v;
  };
  auto optional_real = [&](std::optional<std::size_t> k) -> std::optional<double> {
    if (!k) return std::nullopt;
    auto v = parse_double(f[*k]);
    if (!v || std::isnan(*v)) return std::nullopt;
    return v;
  };

  TripRecord r;
  auto pu = ts(p.pickup_time, "pickup time");
  if (!pu) return std::nullopt;
  auto dof = ts(p.dropoff_time, "dropoff time");
  if (!dof) return std::nullopt;
  auto puz = integer(p.pickup_zone, "pickup zone");
  if (!puz) return std::nullopt;
  auto doz = integer(p.dropoff_zone, "dropoff zone");
  if (!doz) return std::nullopt;
  auto dist = real(p.distance, "trip distance");
  if (!dist) return std::nullopt;
  auto pax = integer(p.passengers, "passenger count");
  if (!pax) return std::nullopt;
  auto rate = integer(p.rate_code, "rate code");
  if (!rate) return std::nullopt;
  auto fare = real(p.fare, "fare amount");
  if (!fare) return std::nullopt;
  auto total = real(p.total, "total amount");
  if (!total) return std::nullopt;
  auto vendor = integer(p.vendor, "vendor");
  if (!vendor) return std::nullopt;

  r.pickup = *pu;
  r.dropoff = *dof;
  r.pickup_zone = *puz;
  r.dropoff_zone = *doz;
  r.distance = *dist;
  r.passengers = *pax;
  r.rate_code = *rate;
  r.fare = *fare;
  r.total = *total;
  r.vendor = *vendor;
  r.mta_tax = optional_real(p.mta_tax);
  r.improvement_surcharge = optional_real(p.improvement);
  r.congestion_surcharge = optional_real(p.congestion);
  return r;
}

}  // namespace

TripTable read_trips(std::istream& in, const ColumnMap& columns, char delim,
                     std::string_view source) {
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::kSchema, std::string(source) + ": empty input");
  const std::vector<std::string> header = split_csv_line(line, delim);
  const ColumnPositions pos = locate_columns(header, columns, source);

  TripTable table;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    ++table.rows;
    const std::vector<std::string> fields = split_csv_line(line, delim);
    std::string why;
    std::optional<TripRecord> rec;
    if (fields.size() != header.size()) {
      why = "expected " + std::to_string(header.size()) + " fields, got " + std::to_string(fields.size());
    } else {
      rec = parse_row(fields, pos, why);
    }
    if (rec) {
      table.records.push_back(*rec);
    } else {
      ++table.unparseable;
      if (table.errors.size() < kMaxReportedErrors) {
        table.errors.push_back(std::string(source) + ":" + std::to_string(line_no) + ": " + why);
      }
    }
  }
  return table;
}

TripTable read_trips_csv(const std::filesystem::path& path, const ColumnMap& columns, char delim) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  return read_trips(in, columns, delim, path.string());
}

void write_trips_csv(const std::filesystem::path& path, std::span<const TripRecord> records,
                     const ColumnMap& c) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path.string());
  out << c.vendor << ',' << c.pickup_time << ',' << c.dropoff_time << ',' << c.passengers << ','
      << c.distance << ',' << c.rate_code << ',' << c.pickup_zone << ',' << c.dropoff_zone << ','
      << c.fare << ',' << c.mta_tax << ',' << c.improvement_surcharge << ',' << c.total << ','
      << c.congestion_surcharge << '\n';
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  for (const auto& r : records) {
    out << r.vendor << ',' << format_timestamp(r.pickup) << ',' << format_timestamp(r.dropoff) << ','
        << r.passengers << ',' << format_double(r.distance) << ',' << r.rate_code << ','
        << r.pickup_zone << ',' << r.dropoff_zone << ',' << format_double(r.fare) << ','
        << opt(r.mta_tax) << ',' << opt(r.improvement_surcharge) << ',' << format_double(r.total)
        << ',' << opt(r.congestion_surcharge) << '\n';
  }
  if (!out) fail(ErrorKind::kIo, "write failed for " + path.string());
}

std::size_t FilterReport::rejected() const {
  std::size_t n = 0;
  for (const auto& [rule, count] : rejections) n += count;
  return n;
}

std::string FilterReport::to_json() const {
  nlohmann::ordered_json j;
  j["input"] = input;
  nlohmann::ordered_json rej = nlohmann::ordered_json::object();
  for (const auto& [rule, count] : rejections) rej[rule] = count;
  j["rejections"] = rej;
  j["output"] = output;
  return j.dump(2);
}

std::string_view first_failed_rule(const TripRecord& r, const FilterConfig& cfg) {
  const std::int64_t sod = second_of_day(r.pickup);
  if (sod < cfg.window_start || sod >= cfg.window_end) return "pickup_window";
  if (!cfg.zones.empty()) {
    auto in_set = [&](int z) { return std::find(cfg.zones.begin(), cfg.zones.end(), z) != cfg.zones.end(); };
    if (!in_set(r.pickup_zone) || !in_set(r.dropoff_zone)) return "zone";
  }
  const double secs = r.trip_seconds();
  if (secs < cfg.min_trip_seconds || secs > cfg.max_trip_seconds) return "trip_time";
  if (r.distance < cfg.min_distance || r.distance > cfg.max_distance) return "trip_distance";
  if (!(r.fare > 0.0) || !(r.total > 0.0)) return "amount";
  if (r.rate_code != cfg.rate_code) return "rate_code";
  if (r.passengers < cfg.min_passengers || r.passengers > cfg.max_passengers) return "passenger_count";
  if (cfg.surcharges) {
    auto matches = [](const std::optional<double>& want, const std::optional<double>& got) {
      return !want || (got && std::abs(*got - *want) < 1e-9);
    };
    const SurchargeRules& s = *cfg.surcharges;
    if (!matches(s.mta_tax, r.mta_tax) || !matches(s.improvement_surcharge, r.improvement_surcharge) ||
        !matches(s.congestion_surcharge, r.congestion_surcharge)) {
      return "surcharge";
    }
  }
  const std::int64_t d = day_of(r.pickup);
  if ((cfg.first_day && d < *cfg.first_day) || (cfg.last_day && d > *cfg.last_day)) return "date";
  if (cfg.weekdays_only) {
    const int wd = weekday_of(d);
    if (wd == 0 || wd == 6) return "date";
  }
  return {};
}

std::pair<std::vector<TripRecord>, FilterReport> filter_trips(const TripTable& table,
                                                              const FilterConfig& cfg) {
  require(cfg.window_start < cfg.window_end, "pickup window must be nonempty");
  FilterReport report;
  report.input = table.records.size() + table.unparseable;
  std::map<std::string_view, std::size_t> counts;
  for (auto rule : kFilterRules) counts[rule] = 0;
  counts["unparseable"] = table.unparseable;

  std::vector<TripRecord> kept;
  for (const auto& r : table.records) {
    const std::string_view rule = first_failed_rule(r, cfg);
    if (rule.empty()) {
      kept.push_back(r);
    } else {
      ++counts[rule];
    }
  }
  for (auto rule : kFilterRules) report.rejections.emplace_back(std::string(rule), counts[rule]);
  report.output = kept.size();
  return {std::move(kept), report};
}

ZoneIndex::ZoneIndex(std::vector<int> zones) : zones_(std::move(zones)) {
  for (std::size_t i = 0; i < zones_.size(); ++i) {
    require(lookup_.emplace(zones_[i], i).second, "duplicate zone " + std::to_string(zones_[i]));
  }
}

std::optional<std::size_t> ZoneIndex::index(int zone) const {
  auto it = lookup_.find(zone);
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> ZoneIndex::labels() const {
  std::vector<std::string> out;
  for (int z : zones_) out.push_back(std::to_string(z));
  return out;
}

ZoneIndex read_zone_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  std::vector<int> zones;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = line.substr(0, line.find('#'));
    for (char& c : line) {
      if (c == ',' || c == '\t') c = ' ';
    }
    std::istringstream words(line);
    std::string w;
    while (words >> w) {
      auto z = parse_int(w);
      if (!z) fail(ErrorKind::kFormat, path.string() + ":" + std::to_string(line_no) + ": bad zone '" + w + "'");
      zones.push_back(static_cast<int>(*z));
    }
  }
  if (zones.empty()) fail(ErrorKind::kFormat, path.string() + ": no zones listed");
  return ZoneIndex(std::move(zones));
}

namespace {

// Pickup times per (pair, day), for trips whose ends both map to an index.
std::map<std::tuple<std::size_t, std::size_t, std::int64_t>, std::vector<Timestamp>>
pickups_by_pair_day(std::span<const TripRecord> records, const ZoneIndex& zones) {
  std::map<std::tuple<std::size_t, std::size_t, std::int64_t>, std::vector<Timestamp>> out;
  for (const auto& r : records) {
    auto i = zones.index(r.pickup_zone);
    auto j = zones.index(r.dropoff_zone);
    if (!i || !j) continue;
    out[{*i, *j, day_of(r.pickup)}].push_back(r.pickup);
  }
  return out;
}

}  // namespace

Matrix<double> interarrival_matrix(std::span<const TripRecord> records, const ZoneIndex& zones) {
  const std::size_t n = zones.size();
  Matrix<double> gap_sum(n, n, 0.0);
  Matrix<double> gap_count(n, n, 0.0);
  for (auto& [key, times] : pickups_by_pair_day(records, zones)) {
    if (times.size() < 2) continue;
    std::sort(times.begin(), times.end());
    const auto [i, j, d] = key;
    // Sum of successive gaps telescopes; integer arithmetic keeps it order-free.
    gap_sum(i, j) += static_cast<double>(times.back() - times.front());
    gap_count(i, j) += static_cast<double>(times.size() - 1);
  }
  Matrix<double> out(n, n, kSentinel);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (gap_count(i, j) > 0) out(i, j) = gap_sum(i, j) / gap_count(i, j);
    }
  }
  return out;
}

Matrix<double> triptime_matrix(std::span<const TripRecord> records, const ZoneIndex& zones) {
  const std::size_t n = zones.size();
  Matrix<long long> sum(n, n, 0);
  Matrix<double> count(n, n, 0.0);
  for (const auto& r : records) {
    auto i = zones.index(r.pickup_zone);
    auto j = zones.index(r.dropoff_zone);
    if (!i || !j) continue;
    sum(*i, *j) += r.dropoff - r.pickup;
    count(*i, *j) += 1.0;
  }
  Matrix<double> out(n, n, kSentinel);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (count(i, j) > 0) out(i, j) = static_cast<double>(sum(i, j)) / count(i, j);
    }
  }
  return out;
}

Matrix<double> trip_counts(std::span<const TripRecord> records, const ZoneIndex& zones) {
  Matrix<double> out(zones.size(), zones.size(), 0.0);
  for (const auto& r : records) {
    auto i = zones.index(r.pickup_zone);
    auto j = zones.index(r.dropoff_zone);
    if (i && j) out(*i, *j) += 1.0;
  }
  return out;
}

std::vector<DayGaps> pickup_gaps(std::span<const TripRecord> records, int origin) {
  std::map<std::int64_t, std::vector<Timestamp>> by_day;
  for (const auto& r : records) {
    if (r.pickup_zone == origin) by_day[day_of(r.pickup)].push_back(r.pickup);
  }
  std::vector<DayGaps> out;
  for (auto& [d, times] : by_day) {
    if (times.size() < 2) continue;
    std::sort(times.begin(), times.end());
    DayGaps g{d, {}};
    for (std::size_t k = 1; k < times.size(); ++k) g.gaps.push_back(static_cast<double>(times[k] - times[k - 1]));
    out.push_back(std::move(g));
  }
  return out;
}

ExpFit exp_fit_quantiles(std::span<const double> gaps, std::size_t q) {
  require(gaps.size() >= 10, "exponential fit needs at least 10 samples, got " + std::to_string(gaps.size()));
  require(q >= 1, "quantile count must be positive");
  std::vector<double> sorted(gaps.begin(), gaps.end());
  std::sort(sorted.begin(), sorted.end());
  const double mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
  if (!(mean > 0.0)) fail(ErrorKind::kNumeric, "exponential fit needs a positive sample mean");

  ExpFit fit;
  fit.rate = 1.0 / mean;
  const double last = static_cast<double>(sorted.size() - 1);
  for (std::size_t k = 1; k <= q; ++k) {
    const double p = (static_cast<double>(k) - 0.5) / static_cast<double>(q);
    // Linear interpolation between order statistics.
    const double h = p * last;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    fit.probabilities.push_back(p);
    fit.empirical.push_back(sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]));
    fit.theoretical.push_back(-std::log1p(-p) / fit.rate);
  }
  return fit;
}

ExpFit exp_fit_quantiles(std::span<const DayGaps> days, std::size_t q) {
  std::vector<double> all;
  for (const auto& d : days) all.insert(all.end(), d.gaps.begin(), d.gaps.end());
  ExpFit fit = exp_fit_quantiles(all, q);
  for (const auto& d : days) {
    if (d.gaps.empty()) continue;
    fit.day_means.emplace_back(d.day, std::accumulate(d.gaps.begin(), d.gaps.end(), 0.0) /
                                          static_cast<double>(d.gaps.size()));
  }
  return fit;
}

std::vector<ZoneDemand> demand_ranking(std::span<const TripRecord> records) {
  std::map<int, std::size_t> counts;
  for (const auto& r : records) ++counts[r.pickup_zone];
  std::vector<ZoneDemand> out;
  for (const auto& [z, c] : counts) out.push_back({z, c});
  std::stable_sort(out.begin(), out.end(), [](const ZoneDemand& a, const ZoneDemand& b) {
    return a.pickups > b.pickups;
  });
  return out;
}

}  // namespace fleet
