#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <ostream>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "fairclus/constraints.hpp"
#include "fairclus/error.hpp"
#include "fairclus/instance.hpp"
#include "fairclus/lp.hpp"

namespace fairclus {

// Arc costs are scaled by this factor and rounded for the integral solver.
inline constexpr double kFlowCostScale = 1e6;

enum class ArcKind { Source, Assign, ColorCenter, CenterSink };

struct FlowArc {
  int tail = 0;
  int head = 0;
  std::int64_t lower = 0;
  std::int64_t upper = 0;
  double cost = 0.0;
  ArcKind kind = ArcKind::Source;
  int point = -1;   // A1, A2
  int center = -1;  // A2, A3, A4 (point id of the center)
  int color = -1;   // A2, A3
};

// Nodes: s, t, one per point, one per (center, color), one per center.
// Arcs are stored A1, A2, A3, A4 in that order.
struct FlowNetwork {
  enum class Mode { MaxFlow, MinCost };

  Mode mode = Mode::MaxFlow;
  int num_points = 0;
  int num_colors = 0;
  std::vector<int> centers;  // sorted
  std::vector<FlowArc> arcs;
  std::vector<std::int64_t> balance;  // MinCost mode only

  int source() const noexcept { return 0; }
  int sink() const noexcept { return 1; }
  int point_node(int j) const noexcept { return 2 + j; }
  int color_node(std::size_t ci, int h) const noexcept {
    return 2 + num_points + static_cast<int>(ci) * num_colors + h;
  }
  int center_node(std::size_t ci) const noexcept {
    return 2 + num_points + static_cast<int>(centers.size()) * num_colors + static_cast<int>(ci);
  }
  int num_nodes() const noexcept {
    return 2 + num_points + static_cast<int>(centers.size()) * (num_colors + 1);
  }

  std::string node_label(int v) const {
    if (v == 0) return "s";
    if (v == 1) return "t";
    if (v < 2 + num_points) return "p" + std::to_string(v - 2);
    const int k = static_cast<int>(centers.size());
    const int off = v - 2 - num_points;
    if (off < k * num_colors) {
      return "c" + std::to_string(centers[off / num_colors]) + "h" + std::to_string(off % num_colors);
    }
    return "c" + std::to_string(centers[off - k * num_colors]);
  }
};

struct IntegralFlow {
  std::vector<std::int64_t> arc_flow;  // parallel to FlowNetwork::arcs
  std::int64_t value = 0;              // flow leaving s
};

struct IntegralAssignment {
  int n = 0;
  std::vector<int> center_of;  // point -> center id
  std::vector<int> centers;

  // x''(i, j) as a 0/1 table.
  FractionalSolution as_fractional() const {
    FractionalSolution s(n);
    for (int c : centers) s.y(c) = 1.0;
    for (int j = 0; j < n; ++j) s.x(center_of[j], j) = 1.0;
    return s;
  }
};

namespace detail {

// Values within kPositiveEps of an integer are treated as that integer.
inline double snap_mass(double v) {
  const double r = std::round(v);
  return std::abs(v - r) <= kPositiveEps ? r : v;
}
inline std::int64_t floor_mass(double v) { return static_cast<std::int64_t>(std::floor(snap_mass(v))); }
inline std::int64_t ceil_mass(double v) { return static_cast<std::int64_t>(std::ceil(snap_mass(v))); }

inline void check_rerouted_support(const FractionalSolution& xp, std::span<const int> centers) {
  for (int i = 0; i < xp.n; ++i) {
    if (std::binary_search(centers.begin(), centers.end(), i)) continue;
    for (int j = 0; j < xp.n; ++j) {
      if (xp.x(i, j) > kPositiveEps) {
        throw Error(ErrorKind::ContractViolation, "rerouted mass on non-center " + std::to_string(i));
      }
    }
  }
}

struct CenterMasses {
  std::vector<double> total;     // per center index
  std::vector<double> by_color;  // [center index][color]
};

inline CenterMasses center_masses(const MetricInstance& inst, const FractionalSolution& xp,
                                  std::span<const int> centers) {
  const int m = inst.num_colors();
  CenterMasses cm;
  cm.total.assign(centers.size(), 0.0);
  cm.by_color.assign(centers.size() * m, 0.0);
  for (std::size_t ci = 0; ci < centers.size(); ++ci) {
    for (int j = 0; j < xp.n; ++j) {
      const double v = xp.x(centers[ci], j);
      cm.total[ci] += v;
      cm.by_color[ci * m + inst.color(j)] += v;
    }
  }
  return cm;
}

inline FlowNetwork network_skeleton(const MetricInstance& inst, const FractionalSolution& xp,
                                    std::span<const int> center_ids, FlowNetwork::Mode mode, Objective o) {
  FlowNetwork net;
  net.mode = mode;
  net.num_points = inst.size();
  net.num_colors = inst.num_colors();
  net.centers.assign(center_ids.begin(), center_ids.end());
  std::sort(net.centers.begin(), net.centers.end());
  check_rerouted_support(xp, net.centers);
  for (int j = 0; j < net.num_points; ++j) {
    net.arcs.push_back({net.source(), net.point_node(j), 0, 1, 0.0, ArcKind::Source, j, -1, -1});
  }
  for (int j = 0; j < net.num_points; ++j) {
    for (std::size_t ci = 0; ci < net.centers.size(); ++ci) {
      const int c = net.centers[ci];
      if (xp.x(c, j) <= kPositiveEps) continue;
      const int h = inst.color(j);
      const double cost = mode == FlowNetwork::Mode::MinCost ? objective_term(o, inst(c, j)) : 0.0;
      net.arcs.push_back({net.point_node(j), net.color_node(ci, h), 0, 1, cost, ArcKind::Assign, j, c, h});
    }
  }
  return net;
}

// Dinic's max flow on an explicit residual graph.
class MaxFlowSolver {
 public:
  explicit MaxFlowSolver(int nodes) : adj_(static_cast<std::size_t>(nodes)) {}

  int add_edge(int u, int v, std::int64_t cap) {
    adj_[u].push_back(static_cast<int>(edges_.size()));
    edges_.push_back({v, cap});
    adj_[v].push_back(static_cast<int>(edges_.size()));
    edges_.push_back({u, 0});
    return static_cast<int>(edges_.size()) - 2;
  }

  std::int64_t flow_on(int e) const { return edges_[e ^ 1].cap; }

  std::int64_t run(int s, int t) {
    std::int64_t total = 0;
    while (bfs(s, t)) {
      it_.assign(adj_.size(), 0);
      while (const std::int64_t f = dfs(s, t, std::numeric_limits<std::int64_t>::max())) total += f;
    }
    return total;
  }

 private:
  struct Edge {
    int to;
    std::int64_t cap;
  };

  bool bfs(int s, int t) {
    level_.assign(adj_.size(), -1);
    std::queue<int> q;
    level_[s] = 0;
    q.push(s);
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int e : adj_[u]) {
        if (edges_[e].cap > 0 && level_[edges_[e].to] < 0) {
          level_[edges_[e].to] = level_[u] + 1;
          q.push(edges_[e].to);
        }
      }
    }
    return level_[t] >= 0;
  }

  std::int64_t dfs(int u, int t, std::int64_t pushed) {
    if (u == t) return pushed;
    for (auto& i = it_[u]; i < adj_[u].size(); ++i) {
      const int e = adj_[u][i];
      const int v = edges_[e].to;
      if (edges_[e].cap <= 0 || level_[v] != level_[u] + 1) continue;
      if (const std::int64_t f = dfs(v, t, std::min(pushed, edges_[e].cap))) {
        edges_[e].cap -= f;
        edges_[e ^ 1].cap += f;
        return f;
      }
    }
    return 0;
  }

  std::vector<std::vector<int>> adj_;
  std::vector<Edge> edges_;
  std::vector<int> level_;
  std::vector<std::size_t> it_;
};

// Successive shortest paths with Johnson potentials; needs nonnegative costs.
class MinCostFlowSolver {
 public:
  explicit MinCostFlowSolver(int nodes) : adj_(static_cast<std::size_t>(nodes)) {}

  int add_edge(int u, int v, std::int64_t cap, std::int64_t cost) {
    adj_[u].push_back(static_cast<int>(edges_.size()));
    edges_.push_back({v, cap, cost});
    adj_[v].push_back(static_cast<int>(edges_.size()));
    edges_.push_back({u, 0, -cost});
    return static_cast<int>(edges_.size()) - 2;
  }

  std::int64_t flow_on(int e) const { return edges_[e ^ 1].cap; }

  // Sends up to `limit` units from s to t at minimum cost; returns the amount sent.
  std::int64_t run(int s, int t, std::int64_t limit) {
    const std::size_t nodes = adj_.size();
    std::vector<std::int64_t> potential(nodes, 0);
    std::int64_t sent = 0;
    constexpr std::int64_t inf = std::numeric_limits<std::int64_t>::max() / 4;
    while (sent < limit) {
      std::vector<std::int64_t> dist(nodes, inf);
      std::vector<int> via(nodes, -1);
      using Item = std::pair<std::int64_t, int>;
      std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
      dist[s] = 0;
      pq.push({0, s});
      while (!pq.empty()) {
        const auto [d, u] = pq.top();
        pq.pop();
        if (d > dist[u]) continue;
        for (int e : adj_[u]) {
          const auto& edge = edges_[e];
          if (edge.cap <= 0) continue;
          const std::int64_t nd = d + edge.cost + potential[u] - potential[edge.to];
          if (nd < dist[edge.to]) {
            dist[edge.to] = nd;
            via[edge.to] = e;
            pq.push({nd, edge.to});
          }
        }
      }
      if (dist[t] >= inf) break;
      for (std::size_t v = 0; v < nodes; ++v) {
        if (dist[v] < inf) potential[v] += dist[v];
      }
      std::int64_t push = limit - sent;
      for (int v = t; v != s; v = edges_[via[v] ^ 1].to) push = std::min(push, edges_[via[v]].cap);
      for (int v = t; v != s; v = edges_[via[v] ^ 1].to) {
        edges_[via[v]].cap -= push;
        edges_[via[v] ^ 1].cap += push;
      }
      sent += push;
    }
    return sent;
  }

 private:
  struct Edge {
    int to;
    std::int64_t cap;
    std::int64_t cost;
  };
  std::vector<std::vector<int>> adj_;
  std::vector<Edge> edges_;
};

[[noreturn]] inline void flow_infeasible(const std::string& what, std::int64_t got, std::int64_t need) {
  throw Error(ErrorKind::ContractViolation, what + ": routed " + std::to_string(got) + " of " +
                                                std::to_string(need) + " required units");
}

}  // namespace detail

// Center-mode network: A1, A2 unit arcs, A3 and A4 bounded by the floor and
// ceiling of the per-color and total masses of x'.
inline FlowNetwork build_center_flow(const MetricInstance& inst, const FractionalSolution& xp,
                                     std::span<const int> centers) {
  auto net = detail::network_skeleton(inst, xp, centers, FlowNetwork::Mode::MaxFlow, Objective::Center);
  const auto cm = detail::center_masses(inst, xp, net.centers);
  const int m = net.num_colors;
  for (std::size_t ci = 0; ci < net.centers.size(); ++ci) {
    for (int h = 0; h < m; ++h) {
      const double mass = cm.by_color[ci * m + h];
      net.arcs.push_back({net.color_node(ci, h), net.center_node(ci), detail::floor_mass(mass),
                          detail::ceil_mass(mass), 0.0, ArcKind::ColorCenter, -1, net.centers[ci], h});
    }
  }
  for (std::size_t ci = 0; ci < net.centers.size(); ++ci) {
    const double mass = cm.total[ci];
    net.arcs.push_back({net.center_node(ci), net.sink(), detail::floor_mass(mass), detail::ceil_mass(mass), 0.0,
                        ArcKind::CenterSink, -1, net.centers[ci], -1});
  }
  return net;
}

// Median/means network: balances encode the floors; A3 and A4 carry at most
// the fractional remainder (one unit when the mass is fractional, none when
// it is integral). A2 costs are d(p,i) or d(p,i)^2.
inline FlowNetwork build_medmeans_flow(const MetricInstance& inst, const FractionalSolution& xp,
                                       std::span<const int> centers, Objective o) {
  auto net = detail::network_skeleton(inst, xp, centers, FlowNetwork::Mode::MinCost, o);
  const auto cm = detail::center_masses(inst, xp, net.centers);
  const int m = net.num_colors;
  net.balance.assign(static_cast<std::size_t>(net.num_nodes()), 0);
  net.balance[net.source()] = net.num_points;
  std::int64_t floor_total = 0;
  for (std::size_t ci = 0; ci < net.centers.size(); ++ci) {
    std::int64_t floor_colors = 0;
    for (int h = 0; h < m; ++h) {
      const double mass = cm.by_color[ci * m + h];
      const std::int64_t lo = detail::floor_mass(mass);
      floor_colors += lo;
      net.balance[net.color_node(ci, h)] = -lo;
      net.arcs.push_back({net.color_node(ci, h), net.center_node(ci), 0, detail::ceil_mass(mass) - lo, 0.0,
                          ArcKind::ColorCenter, -1, net.centers[ci], h});
    }
    const std::int64_t lo_total = detail::floor_mass(cm.total[ci]);
    floor_total += lo_total;
    net.balance[net.center_node(ci)] = -(lo_total - floor_colors);
  }
  for (std::size_t ci = 0; ci < net.centers.size(); ++ci) {
    const double mass = cm.total[ci];
    const std::int64_t lo = detail::floor_mass(mass);
    net.arcs.push_back({net.center_node(ci), net.sink(), 0, detail::ceil_mass(mass) - lo, 0.0,
                        ArcKind::CenterSink, -1, net.centers[ci], -1});
  }
  net.balance[net.sink()] = -(net.num_points - floor_total);
  return net;
}

// Feasible integral s-t flow of value |P| respecting lower bounds, via the
// circulation reduction and Dinic's algorithm.
inline IntegralFlow max_flow_with_lower_bounds(const FlowNetwork& net) {
  const int nodes = net.num_nodes();
  const int ss = nodes;
  const int tt = nodes + 1;
  detail::MaxFlowSolver solver(nodes + 2);
  std::vector<std::int64_t> excess(static_cast<std::size_t>(nodes), 0);
  std::vector<int> edge_of(net.arcs.size());
  for (std::size_t a = 0; a < net.arcs.size(); ++a) {
    const auto& arc = net.arcs[a];
    if (arc.lower > arc.upper) {
      throw Error(ErrorKind::ContractViolation, "arc " + net.node_label(arc.tail) + "->" +
                                                    net.node_label(arc.head) + " has lower > upper");
    }
    edge_of[a] = solver.add_edge(arc.tail, arc.head, arc.upper - arc.lower);
    excess[arc.head] += arc.lower;
    excess[arc.tail] -= arc.lower;
  }
  // Return arc t -> s fixed at |P| forces the s-t value.
  const std::int64_t value = net.num_points;
  excess[net.source()] += value;
  excess[net.sink()] -= value;
  std::int64_t need = 0;
  for (int v = 0; v < nodes; ++v) {
    if (excess[v] > 0) {
      solver.add_edge(ss, v, excess[v]);
      need += excess[v];
    } else if (excess[v] < 0) {
      solver.add_edge(v, tt, -excess[v]);
    }
  }
  const std::int64_t got = solver.run(ss, tt);
  if (got != need) detail::flow_infeasible("max flow with lower bounds is infeasible", got, need);
  IntegralFlow flow;
  flow.arc_flow.resize(net.arcs.size());
  for (std::size_t a = 0; a < net.arcs.size(); ++a) {
    flow.arc_flow[a] = net.arcs[a].lower + solver.flow_on(edge_of[a]);
    if (net.arcs[a].tail == net.source()) flow.value += flow.arc_flow[a];
  }
  return flow;
}

// Integral min-cost flow meeting every node balance. Costs are scaled by
// `cost_scale` and rounded; lower bounds are folded into the balances.
inline IntegralFlow min_cost_flow(const FlowNetwork& net, double cost_scale = kFlowCostScale) {
  const int nodes = net.num_nodes();
  if (net.balance.size() != static_cast<std::size_t>(nodes)) {
    throw Error(ErrorKind::Validation, "min-cost network needs one balance per node");
  }
  std::int64_t sum = 0;
  for (auto b : net.balance) sum += b;
  if (sum != 0) throw Error(ErrorKind::Validation, "node balances do not sum to zero");

  const int ss = nodes;
  const int tt = nodes + 1;
  detail::MinCostFlowSolver solver(nodes + 2);
  auto supply = net.balance;
  std::vector<int> edge_of(net.arcs.size());
  for (std::size_t a = 0; a < net.arcs.size(); ++a) {
    const auto& arc = net.arcs[a];
    if (arc.cost < 0) throw Error(ErrorKind::Validation, "negative arc cost");
    const auto cost = static_cast<std::int64_t>(std::llround(arc.cost * cost_scale));
    edge_of[a] = solver.add_edge(arc.tail, arc.head, arc.upper - arc.lower, cost);
    supply[arc.tail] -= arc.lower;
    supply[arc.head] += arc.lower;
  }
  std::int64_t need = 0;
  for (int v = 0; v < nodes; ++v) {
    if (supply[v] > 0) {
      solver.add_edge(ss, v, supply[v], 0);
      need += supply[v];
    } else if (supply[v] < 0) {
      solver.add_edge(v, tt, -supply[v], 0);
    }
  }
  const std::int64_t got = solver.run(ss, tt, need);
  if (got != need) detail::flow_infeasible("min-cost flow balances cannot be met", got, need);
  IntegralFlow flow;
  flow.arc_flow.resize(net.arcs.size());
  for (std::size_t a = 0; a < net.arcs.size(); ++a) {
    flow.arc_flow[a] = net.arcs[a].lower + solver.flow_on(edge_of[a]);
    if (net.arcs[a].tail == net.source()) flow.value += flow.arc_flow[a];
  }
  return flow;
}

// Reads x'' off the A2 arcs: every point must route exactly one unit.
inline IntegralAssignment extract_assignment(const FlowNetwork& net, const IntegralFlow& flow) {
  if (flow.arc_flow.size() != net.arcs.size()) throw Error(ErrorKind::Validation, "flow/network mismatch");
  IntegralAssignment out;
  out.n = net.num_points;
  out.centers = net.centers;
  out.center_of.assign(static_cast<std::size_t>(net.num_points), -1);
  for (std::size_t a = 0; a < net.arcs.size(); ++a) {
    const auto& arc = net.arcs[a];
    const auto f = flow.arc_flow[a];
    if (f < arc.lower || f > arc.upper) {
      throw Error(ErrorKind::ContractViolation, "flow violates bounds on arc " + net.node_label(arc.tail) +
                                                    "->" + net.node_label(arc.head));
    }
    if (arc.kind != ArcKind::Assign || f == 0) continue;
    if (out.center_of[arc.point] >= 0) {
      throw Error(ErrorKind::ContractViolation, "point " + std::to_string(arc.point) + " assigned twice");
    }
    out.center_of[arc.point] = arc.center;
  }
  for (int j = 0; j < out.n; ++j) {
    if (out.center_of[j] < 0) {
      throw Error(ErrorKind::ContractViolation, "flow leaves point " + std::to_string(j) + " unassigned");
    }
  }
  return out;
}

// Edge list: one arc per line as `tail head lower upper cost`, node labels
// and balances in `#` comment lines.
inline void write_flow_network(const FlowNetwork& net, std::ostream& out) {
  out << "# mode " << (net.mode == FlowNetwork::Mode::MaxFlow ? "maxflow" : "mincost") << "\n";
  out << "# nodes " << net.num_nodes() << "\n";
  for (int v = 0; v < net.num_nodes(); ++v) {
    out << "# node " << v << " " << net.node_label(v);
    if (!net.balance.empty()) out << " balance " << net.balance[v];
    out << "\n";
  }
  for (const auto& arc : net.arcs) {
    out << arc.tail << " " << arc.head << " " << arc.lower << " " << arc.upper << " " << arc.cost << "\n";
  }
}

}  // namespace fairclus
