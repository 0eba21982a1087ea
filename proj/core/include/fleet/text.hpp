#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fleet {

std::string_view trim(std::string_view s);

// Splits one delimiter-separated line. Double quotes group a field; there is
// no support for embedded newlines.
std::vector<std::string> split_csv_line(std::string_view line, char delim = ',');

// Accepts plain numbers plus "inf"/"NA"/"" for the no-demand sentinel.
std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

// Shortest representation that parses back to the same double.
std::string format_double(double v);

}  // namespace fleet
