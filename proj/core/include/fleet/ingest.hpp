#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fleet/matrix.hpp"

namespace fleet {

// Timestamps are naive local wall-clock seconds since 1970-01-01 00:00:00.
using Timestamp = std::int64_t;

std::optional<Timestamp> parse_timestamp(std::string_view s);  // "YYYY-MM-DD HH:MM:SS"
std::string format_timestamp(Timestamp t);
inline std::int64_t day_of(Timestamp t) { return t >= 0 ? t / 86400 : (t - 86399) / 86400; }
inline std::int64_t second_of_day(Timestamp t) { return t - day_of(t) * 86400; }
std::optional<std::int64_t> parse_date(std::string_view s);  // "YYYY-MM-DD" -> day number
std::string format_date(std::int64_t day);
int weekday_of(std::int64_t day);  // 0 = Sunday

struct TripRecord {
  Timestamp pickup = 0;
  Timestamp dropoff = 0;
  int pickup_zone = 0;
  int dropoff_zone = 0;
  double distance = 0.0;  // miles
  int passengers = 0;
  int rate_code = 0;
  double fare = 0.0;
  double total = 0.0;
  int vendor = 0;
  // Present only when the input carries the column.
  std::optional<double> mta_tax;
  std::optional<double> improvement_surcharge;
  std::optional<double> congestion_surcharge;

  double trip_seconds() const { return static_cast<double>(dropoff - pickup); }
};

// Header names for each field; defaults follow the public yellow-cab schema.
struct ColumnMap {
  std::string pickup_time = "tpep_pickup_datetime";
  std::string dropoff_time = "tpep_dropoff_datetime";
  std::string pickup_zone = "PULocationID";
  std::string dropoff_zone = "DOLocationID";
  std::string distance = "trip_distance";
  std::string passengers = "passenger_count";
  std::string rate_code = "RatecodeID";
  std::string fare = "fare_amount";
  std::string total = "total_amount";
  std::string vendor = "VendorID";
  std::string mta_tax = "mta_tax";
  std::string improvement_surcharge = "improvement_surcharge";
  std::string congestion_surcharge = "congestion_surcharge";
};

struct TripTable {
  std::vector<TripRecord> records;
  std::size_t rows = 0;         // data rows read, parseable or not
  std::size_t unparseable = 0;
  std::vector<std::string> errors;  // first few parse failures, with line numbers
};

// Throws a schema error naming the first missing required column.
TripTable read_trips(std::istream& in, const ColumnMap& columns = {}, char delim = ',',
                     std::string_view source = "<input>");
TripTable read_trips_csv(const std::filesystem::path& path, const ColumnMap& columns = {},
                         char delim = ',');
void write_trips_csv(const std::filesystem::path& path, std::span<const TripRecord> records,
                     const ColumnMap& columns = {});

struct SurchargeRules {
  std::optional<double> mta_tax;
  std::optional<double> improvement_surcharge;
  std::optional<double> congestion_surcharge;
};

struct FilterConfig {
  std::int64_t window_start = 8 * 3600;  // seconds of day, inclusive
  std::int64_t window_end = 9 * 3600;    // exclusive
  std::vector<int> zones;                // both ends must lie here; empty admits all
  double min_trip_seconds = 60.0;
  double max_trip_seconds = 7200.0;
  double min_distance = 0.1;
  double max_distance = 20.0;
  int rate_code = 1;
  int min_passengers = 1;
  int max_passengers = 6;
  std::optional<SurchargeRules> surcharges;
  std::optional<std::int64_t> first_day;  // inclusive day numbers
  std::optional<std::int64_t> last_day;
  bool weekdays_only = false;
};

// Rule names in evaluation order; a rejected record counts against the first
// rule it fails.
inline constexpr std::string_view kFilterRules[] = {
    "unparseable", "pickup_window", "zone", "trip_time", "trip_distance", "amount",
    "rate_code", "passenger_count", "surcharge", "date"};

struct FilterReport {
  std::size_t input = 0;
  std::vector<std::pair<std::string, std::size_t>> rejections;
  std::size_t output = 0;

  std::size_t rejected() const;
  bool reconciles() const { return input == output + rejected(); }
  std::string to_json() const;
};

// Name of the first rule `r` fails, or empty when it passes all of them.
std::string_view first_failed_rule(const TripRecord& r, const FilterConfig& cfg);

std::pair<std::vector<TripRecord>, FilterReport> filter_trips(const TripTable& table,
                                                              const FilterConfig& cfg);

class ZoneIndex {
 public:
  explicit ZoneIndex(std::vector<int> zones);
  std::size_t size() const noexcept { return zones_.size(); }
  std::optional<std::size_t> index(int zone) const;
  const std::vector<int>& zones() const noexcept { return zones_; }
  std::vector<std::string> labels() const;

 private:
  std::vector<int> zones_;
  std::unordered_map<int, std::size_t> lookup_;
};

// Ordered zone IDs, separated by commas, whitespace or newlines; '#' starts a comment.
ZoneIndex read_zone_file(const std::filesystem::path& path);

// Mean of successive same-day pickup gaps per OD pair, pooled over days.
// Pairs with no same-day gap hold +inf.
Matrix<double> interarrival_matrix(std::span<const TripRecord> records, const ZoneIndex& zones);
// Mean dropoff - pickup per OD pair; +inf where there are no trips.
Matrix<double> triptime_matrix(std::span<const TripRecord> records, const ZoneIndex& zones);
Matrix<double> trip_counts(std::span<const TripRecord> records, const ZoneIndex& zones);

struct DayGaps {
  std::int64_t day = 0;
  std::vector<double> gaps;
};

// Same-day successive gaps between pickups at `origin` (any destination).
std::vector<DayGaps> pickup_gaps(std::span<const TripRecord> records, int origin);

struct ExpFit {
  double rate = 0.0;
  std::vector<double> probabilities;  // (k - 0.5) / q
  std::vector<double> empirical;
  std::vector<double> theoretical;
  std::vector<std::pair<std::int64_t, double>> day_means;
};

ExpFit exp_fit_quantiles(std::span<const double> gaps, std::size_t q);
ExpFit exp_fit_quantiles(std::span<const DayGaps> days, std::size_t q);

struct ZoneDemand {
  int zone = 0;
  std::size_t pickups = 0;
};

// Pickups per zone, busiest first, ties by zone ID.
std::vector<ZoneDemand> demand_ranking(std::span<const TripRecord> records);

}  // namespace fleet
