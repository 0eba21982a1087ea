#include "fleet/mincostflow.hpp"

#include <algorithm>
#include <limits>

#include <nlohmann/json.hpp>

#include "fleet/error.hpp"

namespace fleet {

void TransportationInstance::validate() const {
  require(cost.rows() == supplies.size() && cost.cols() == demands.size(),
          "cost matrix must be sources x sinks");
  for (auto s : supplies) require(s >= 0, "supplies must be nonnegative");
  for (auto d : demands) require(d >= 0, "demands must be nonnegative");
  for (auto c : cost.values()) require(c >= 0, "costs must be nonnegative");
}

namespace {

constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;

struct Arc {
  std::size_t to;
  std::int64_t cap;
  std::int64_t cost;
};

class FlowGraph {
 public:
  explicit FlowGraph(std::size_t nodes) : out_(nodes) {}

  std::size_t add_arc(std::size_t from, std::size_t to, std::int64_t cap, std::int64_t cost) {
    const std::size_t id = arcs_.size();
    arcs_.push_back({to, cap, cost});
    arcs_.push_back({from, 0, -cost});
    out_[from].push_back(id);
    out_[to].push_back(id + 1);
    return id;
  }

  const Arc& arc(std::size_t id) const { return arcs_[id]; }

  // Returns total units pushed from s to t along successive cheapest paths.
  std::int64_t run(std::size_t s, std::size_t t) {
    const std::size_t n = out_.size();
    std::vector<std::int64_t> potential(n, 0);
    std::vector<std::int64_t> dist(n);
    std::vector<std::size_t> via(n);
    std::vector<char> done(n);
    std::int64_t pushed = 0;
    for (;;) {
      // Dense Dijkstra on reduced costs; graphs here have at most a few dozen
      // nodes. Scanning in index order gives the lowest-index tie rule.
      std::fill(dist.begin(), dist.end(), kInf);
      std::fill(done.begin(), done.end(), 0);
      dist[s] = 0;
      for (;;) {
        std::size_t u = n;
        for (std::size_t v = 0; v < n; ++v) {
          if (!done[v] && dist[v] < kInf && (u == n || dist[v] < dist[u])) u = v;
        }
        if (u == n) break;
        done[u] = 1;
        for (std::size_t id : out_[u]) {
          const Arc& a = arcs_[id];
          if (a.cap <= 0 || done[a.to]) continue;
          const std::int64_t nd = dist[u] + a.cost + potential[u] - potential[a.to];
          if (nd < dist[a.to]) {
            dist[a.to] = nd;
            via[a.to] = id;
          }
        }
      }
      if (dist[t] >= kInf) break;
      for (std::size_t v = 0; v < n; ++v) {
        if (dist[v] < kInf) potential[v] += dist[v];
      }
      std::int64_t bottleneck = kInf;
      for (std::size_t v = t; v != s; v = arcs_[via[v] ^ 1].to) {
        bottleneck = std::min(bottleneck, arcs_[via[v]].cap);
      }
      for (std::size_t v = t; v != s; v = arcs_[via[v] ^ 1].to) {
        arcs_[via[v]].cap -= bottleneck;
        arcs_[via[v] ^ 1].cap += bottleneck;
      }
      pushed += bottleneck;
    }
    return pushed;
  }

 private:
  std::vector<Arc> arcs_;
  std::vector<std::vector<std::size_t>> out_;
};

}  // namespace

FlowSolution solve_transportation(const TransportationInstance& instance) {
  instance.validate();
  const std::size_t a = instance.supplies.size();
  const std::size_t b = instance.demands.size();
  FlowSolution sol;
  sol.flow = Matrix<std::int64_t>(a, b, 0);
  if (a == 0 || b == 0) return sol;

  // Node layout: 0 = super source, 1..a sources, a+1..a+b sinks, a+b+1 sink.
  const std::size_t source = 0;
  const std::size_t sink = a + b + 1;
  FlowGraph graph(a + b + 2);
  for (std::size_t i = 0; i < a; ++i) {
    graph.add_arc(source, 1 + i, instance.supplies[i], 0);
  }
  Matrix<std::size_t> shipping(a, b);
  for (std::size_t i = 0; i < a; ++i) {
    for (std::size_t j = 0; j < b; ++j) {
      shipping(i, j) = graph.add_arc(1 + i, 1 + a + j, kInf, instance.cost(i, j));
    }
  }
  for (std::size_t j = 0; j < b; ++j) {
    graph.add_arc(1 + a + j, sink, instance.demands[j], 0);
  }

  sol.shipped = graph.run(source, sink);
  for (std::size_t i = 0; i < a; ++i) {
    for (std::size_t j = 0; j < b; ++j) {
      const std::int64_t f = graph.arc(shipping(i, j) ^ 1).cap;
      sol.flow(i, j) = f;
      sol.total_cost += f * instance.cost(i, j);
    }
  }
  return sol;
}

TransportationInstance build_rebalance_instance(std::span<const int> position,
                                                std::span<const int> v_desired,
                                                std::span<const int> caps,
                                                const Matrix<int>& travel_time) {
  const std::size_t n = position.size();
  require(v_desired.size() == n && caps.size() == n, "rebalance vectors must share one length");
  require(travel_time.rows() == n && travel_time.cols() == n, "travel-time matrix has the wrong shape");
  TransportationInstance inst;
  for (std::size_t i = 0; i < n; ++i) {
    const int supply = std::min(caps[i], position[i] - v_desired[i]);
    if (supply > 0) {
      inst.supplies.push_back(supply);
      inst.source_station.push_back(i);
    }
    const int need = v_desired[i] - position[i];
    if (need > 0) {
      inst.demands.push_back(need);
      inst.sink_station.push_back(i);
    }
  }
  inst.cost = Matrix<std::int64_t>(inst.supplies.size(), inst.demands.size());
  for (std::size_t s = 0; s < inst.source_station.size(); ++s) {
    for (std::size_t d = 0; d < inst.sink_station.size(); ++d) {
      inst.cost(s, d) = travel_time(inst.source_station[s], inst.sink_station[d]);
    }
  }
  return inst;
}

namespace {

nlohmann::json rows_of(const Matrix<std::int64_t>& m) {
  auto rows = nlohmann::json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    rows.push_back(std::vector<std::int64_t>(r.begin(), r.end()));
  }
  return rows;
}

}  // namespace

void to_json(nlohmann::json& j, const TransportationInstance& instance) {
  j = {{"supplies", instance.supplies},
       {"demands", instance.demands},
       {"cost", rows_of(instance.cost)},
       {"source_station", instance.source_station},
       {"sink_station", instance.sink_station}};
}

void to_json(nlohmann::json& j, const FlowSolution& solution) {
  j = {{"flow", rows_of(solution.flow)},
       {"total_cost", solution.total_cost},
       {"shipped", solution.shipped}};
}

}  // namespace fleet
