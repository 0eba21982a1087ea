#include "fleet/network.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>

#include "fleet/error.hpp"
#include "fleet/text.hpp"

namespace fleet {

double DemandModel::total_rate() const {
  double total = 0.0;
  for (double r : rate.values()) total += r;
  return total;
}

Network build_network(const Matrix<double>& distance, double speed_mph,
                      std::size_t k, std::vector<std::string> labels) {
  const std::size_t n = distance.rows();
  require(distance.square(), "distance matrix must be square");
  require(n >= 2, "network needs at least two stations");
  require(speed_mph > 0.0 && std::isfinite(speed_mph), "speed must be positive");
  require(k >= 1 && k <= n - 1, "k must lie in [1, n-1], got " + std::to_string(k));
  if (labels.empty()) {
    for (std::size_t i = 0; i < n; ++i) labels.push_back(std::to_string(i));
  }
  require(labels.size() == n, "label count does not match matrix size");

  Network net;
  net.labels = std::move(labels);
  net.distance = distance;
  net.speed_mph = speed_mph;
  net.travel_time = Matrix<int>(n, n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double d = distance(i, j);
      require(std::isfinite(d) && d >= 0.0, "distances must be finite and nonnegative");
      if (i == j) {
        require(d == 0.0, "diagonal distances must be zero");
        continue;
      }
      const int t = static_cast<int>(std::floor(d / speed_mph * 3600.0 + 0.5));
      net.travel_time(i, j) = std::max(t, 1);
      net.t_max = std::max(net.t_max, net.travel_time(i, j));
    }
  }

  net.neighbors.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> order;
    order.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) order.push_back(j);
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return distance(i, a) < distance(i, b);
    });
    order.resize(k);
    net.neighbors[i] = std::move(order);
  }
  return net;
}

std::span<const std::size_t> k_nearest(const Network& network, std::size_t i) {
  require(i < network.size(), "station index out of range");
  return network.neighbors[i];
}

DemandModel demand_from_interarrival(const Matrix<double>& mean_interarrival) {
  require(mean_interarrival.square(), "interarrival matrix must be square");
  const std::size_t n = mean_interarrival.rows();
  DemandModel model;
  model.rate = Matrix<double>(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double gap = mean_interarrival(i, j);
      if (std::isnan(gap) || gap == kNoDemand) continue;
      require(gap > 0.0, "interarrival times must be positive");
      if (i != j) model.rate(i, j) = 1.0 / gap;
    }
  }
  return model;
}

LabeledMatrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::kFormat, path.string() + ": empty file");
  auto header = split_csv_line(line);
  require(header.size() >= 2, path.string() + ": header needs station labels");
  LabeledMatrix out;
  out.labels.assign(header.begin() + 1, header.end());
  const std::size_t n = out.labels.size();
  out.values = Matrix<double>(n, n);

  std::size_t row = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (row >= n) fail(ErrorKind::kFormat, where + ": more rows than columns");
    if (cells.size() != n + 1) fail(ErrorKind::kFormat, where + ": expected " + std::to_string(n + 1) + " cells");
    if (cells[0] != out.labels[row]) {
      fail(ErrorKind::kFormat, where + ": row label '" + cells[0] + "' does not match column '" + out.labels[row] + "'");
    }
    for (std::size_t j = 0; j < n; ++j) {
      auto value = parse_double(cells[j + 1]);
      if (!value) fail(ErrorKind::kFormat, where + ": bad number '" + cells[j + 1] + "'");
      out.values(row, j) = *value;
    }
    ++row;
  }
  if (row != n) fail(ErrorKind::kFormat, path.string() + ": matrix is not square");
  return out;
}

void write_matrix_csv(const std::filesystem::path& path,
                      std::span<const std::string> labels,
                      const Matrix<double>& values) {
  require(labels.size() == values.rows() && values.square(), "label/matrix size mismatch");
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path.string());
  out << "station";
  for (const auto& l : labels) out << ',' << l;
  out << '\n';
  for (std::size_t i = 0; i < values.rows(); ++i) {
    out << labels[i];
    for (double v : values.row(i)) out << ',' << format_double(v);
    out << '\n';
  }
}

}  // namespace fleet
