#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "fairclus/ds_subroutine.hpp"
#include "fairclus/flow.hpp"
#include "fairclus/lp.hpp"
#include "fairclus/rerouting.hpp"
#include "support.hpp"

using namespace fairclus;

namespace {

MetricInstance line(std::vector<double> xs, std::vector<int> colors, int m) {
  std::vector<std::vector<double>> coords;
  for (double x : xs) coords.push_back({x});
  return MetricInstance::from_coords(std::move(colors), m, std::move(coords));
}

const FlowArc& find_arc(const FlowNetwork& net, ArcKind kind, int center, int color = -1) {
  for (const auto& a : net.arcs) {
    if (a.kind == kind && a.center == center && a.color == color) return a;
  }
  throw std::runtime_error("arc not found");
}

double assignment_cost_of(const MetricInstance& inst, const std::vector<int>& center_of, Objective o) {
  double total = 0.0;
  for (int j = 0; j < inst.size(); ++j) total += objective_term(o, inst(center_of[j], j));
  return total;
}

// Cheapest assignment supported on x' whose per-(center, color) and
// per-center counts lie in the [floor, ceil] windows of the masses.
std::optional<double> brute_force_rounding(const MetricInstance& inst, const FractionalSolution& xp,
                                           const std::vector<int>& centers, Objective o) {
  const int n = inst.size();
  const int m = inst.num_colors();
  const std::size_t k = centers.size();
  std::vector<double> mass(k, 0.0), mass_h(k * m, 0.0);
  for (std::size_t ci = 0; ci < k; ++ci) {
    for (int j = 0; j < n; ++j) {
      mass[ci] += xp.x(centers[ci], j);
      mass_h[ci * m + inst.color(j)] += xp.x(centers[ci], j);
    }
  }
  auto window = [](double v) {
    const double r = std::round(v);
    if (std::abs(v - r) <= 1e-9) return std::pair<int, int>(static_cast<int>(r), static_cast<int>(r));
    return std::pair<int, int>(static_cast<int>(std::floor(v)), static_cast<int>(std::ceil(v)));
  };
  std::vector<int> count(k, 0), count_h(k * m, 0);
  std::optional<double> best;
  std::function<void(int, double)> rec = [&](int j, double cost) {
    if (j == n) {
      for (std::size_t ci = 0; ci < k; ++ci) {
        const auto [lo, hi] = window(mass[ci]);
        if (count[ci] < lo || count[ci] > hi) return;
        for (int h = 0; h < m; ++h) {
          const auto [l, u] = window(mass_h[ci * m + h]);
          if (count_h[ci * m + h] < l || count_h[ci * m + h] > u) return;
        }
      }
      if (!best || cost < *best) best = cost;
      return;
    }
    for (std::size_t ci = 0; ci < k; ++ci) {
      if (xp.x(centers[ci], j) <= 1e-9) continue;
      ++count[ci];
      ++count_h[ci * m + inst.color(j)];
      rec(j + 1, cost + objective_term(o, inst(centers[ci], j)));
      --count[ci];
      --count_h[ci * m + inst.color(j)];
    }
  };
  rec(0, 0.0);
  return best;
}

struct Rounded {
  FractionalSolution xp;
  std::vector<int> centers;
};

Rounded rerouted_for(const fixtures::SeededCase& sc, Objective o) {
  const auto ds = solve_ds_exact(sc.inst, sc.ds, o);
  if (o == Objective::Center) {
    const double lambda = std::max(min_feasible_lambda(sc.inst, sc.gf, sc.ds.k, pairwise_distance_set(sc.inst)), ds.cost);
    const auto lp = solve_lp(build_gf_feasibility_lp(sc.inst, sc.gf, sc.ds.k, lambda));
    return {reroute_center(sc.inst, *lp, ds.centers).solution, ds.centers};
  }
  const auto lp = solve_lp(build_gf_objective_lp(sc.inst, sc.gf, sc.ds.k, o));
  return {reroute_medmeans(sc.inst, *lp, ds.centers).solution, ds.centers};
}

}  // namespace

TEST(FlowNetwork, FractionalMassesGiveFloorCeilBounds) {
  const auto inst = line({0, 1, 2, 3, 4, 5}, {0, 0, 0, 1, 1, 1}, 2);
  FractionalSolution xp(6);
  for (int j = 0; j < 5; ++j) xp.x(0, j) = 0.8;
  for (int j = 0; j < 5; ++j) xp.x(5, j) = 0.2;
  xp.x(5, 5) = 1.0;
  const std::vector<int> centers{0, 5};
  const auto net = build_center_flow(inst, xp, centers);
  EXPECT_EQ(net.num_nodes(), 2 + 6 + 2 * 2 + 2);
  const auto& a0 = find_arc(net, ArcKind::ColorCenter, 0, 0);
  EXPECT_EQ(a0.lower, 2);
  EXPECT_EQ(a0.upper, 3);
  const auto& a1 = find_arc(net, ArcKind::ColorCenter, 0, 1);
  EXPECT_EQ(a1.lower, 1);
  EXPECT_EQ(a1.upper, 2);
  const auto& a4 = find_arc(net, ArcKind::CenterSink, 0);
  EXPECT_EQ(a4.lower, 4);
  EXPECT_EQ(a4.upper, 4);
  const auto& b4 = find_arc(net, ArcKind::CenterSink, 5);
  EXPECT_EQ(b4.lower, 2);
  EXPECT_EQ(b4.upper, 2);

  const auto flow = max_flow_with_lower_bounds(net);
  EXPECT_EQ(flow.value, 6);
  const auto a = extract_assignment(net, flow);
  EXPECT_EQ(std::count(a.center_of.begin(), a.center_of.end(), 0), 4);
  EXPECT_EQ(a.center_of[5], 5);
}

TEST(FlowNetwork, IntegralInputPassesThrough) {
  const auto inst = line({0, 1, 2, 7, 8}, {0, 1, 0, 1, 0}, 2);
  FractionalSolution xp(5);
  const std::vector<int> centers{1, 3};
  const std::vector<int> owner{1, 1, 1, 3, 3};
  for (int c : centers) xp.y(c) = 1.0;
  for (int j = 0; j < 5; ++j) xp.x(owner[j], j) = 1.0;
  EXPECT_EQ(extract_assignment(build_center_flow(inst, xp, centers),
                               max_flow_with_lower_bounds(build_center_flow(inst, xp, centers)))
                .center_of,
            owner);
  const auto net = build_medmeans_flow(inst, xp, centers, Objective::Median);
  const auto a = extract_assignment(net, min_cost_flow(net));
  EXPECT_EQ(a.center_of, owner);
  EXPECT_EQ(a.as_fractional().xs, xp.xs);
}

TEST(FlowNetwork, InfeasibleLowerBoundsAreReported) {
  const auto inst = line({0, 1}, {0, 0}, 1);
  FractionalSolution xp(2);
  xp.x(0, 0) = xp.x(0, 1) = 1.0;
  const std::vector<int> centers{0};
  auto net = build_center_flow(inst, xp, centers);
  for (auto& arc : net.arcs) {
    if (arc.kind == ArcKind::CenterSink) arc.lower = arc.upper = 3;
  }
  try {
    max_flow_with_lower_bounds(net);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ContractViolation);
    EXPECT_NE(std::string(e.what()).find("infeasible"), std::string::npos);
  }
  auto bad = net;
  bad.arcs.back().lower = 4;
  EXPECT_THROW(max_flow_with_lower_bounds(bad), Error);
}

TEST(FlowNetwork, MassOnNonCenterIsRejected) {
  const auto inst = line({0, 1}, {0, 0}, 1);
  FractionalSolution xp(2);
  xp.x(0, 0) = 1.0;
  xp.x(1, 1) = 1.0;
  try {
    build_center_flow(inst, xp, std::vector<int>{0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ContractViolation);
  }
}

TEST(MinCostFlow, SinglePointAndZeroCost) {
  const auto one = line({2}, {0}, 1);
  FractionalSolution xp(1);
  xp.x(0, 0) = xp.y(0) = 1.0;
  const std::vector<int> c0{0};
  const auto net = build_medmeans_flow(one, xp, c0, Objective::Means);
  const auto f = min_cost_flow(net);
  EXPECT_EQ(f.value, 1);
  EXPECT_EQ(extract_assignment(net, f).center_of, (std::vector<int>{0}));

  const auto stack = line({1, 1, 1, 1}, {0, 1, 0, 1}, 2);
  FractionalSolution sp(4);
  for (int j = 0; j < 4; ++j) {
    sp.x(0, j) = 0.5;
    sp.x(3, j) = 0.5;
  }
  const std::vector<int> cs{0, 3};
  const auto sn = build_medmeans_flow(stack, sp, cs, Objective::Median);
  const auto a = extract_assignment(sn, min_cost_flow(sn));
  EXPECT_EQ(assignment_cost_of(stack, a.center_of, Objective::Median), 0.0);
  EXPECT_EQ(std::count(a.center_of.begin(), a.center_of.end(), 0), 2);
}

TEST(MinCostFlow, RejectsBadBalances) {
  const auto one = line({0}, {0}, 1);
  FractionalSolution xp(1);
  xp.x(0, 0) = 1.0;
  auto net = build_medmeans_flow(one, xp, std::vector<int>{0}, Objective::Median);
  net.balance[0] += 1;
  EXPECT_THROW(min_cost_flow(net), Error);
  net.balance.pop_back();
  EXPECT_THROW(min_cost_flow(net), Error);
}

TEST(FlowDump, EdgeListFormat) {
  const auto inst = line({0, 1}, {0, 1}, 2);
  FractionalSolution xp(2);
  xp.x(0, 0) = xp.x(0, 1) = 1.0;
  const auto net = build_medmeans_flow(inst, xp, std::vector<int>{0}, Objective::Median);
  std::ostringstream out;
  write_flow_network(net, out);
  std::istringstream in(out.str());
  std::string line_text;
  int comments = 0, arcs = 0;
  while (std::getline(in, line_text)) {
    if (line_text.rfind("#", 0) == 0) {
      ++comments;
      continue;
    }
    std::istringstream fields(line_text);
    int tail = 0, head = 0;
    std::int64_t lo = 0, hi = 0;
    double cost = 0;
    ASSERT_TRUE(fields >> tail >> head >> lo >> hi >> cost) << line_text;
    EXPECT_LE(lo, hi);
    ++arcs;
  }
  EXPECT_EQ(comments, 2 + net.num_nodes());
  EXPECT_EQ(arcs, static_cast<int>(net.arcs.size()));
  EXPECT_NE(out.str().find("# node 0 s balance 2"), std::string::npos) << out.str();
  EXPECT_NE(out.str().find("# mode mincost"), std::string::npos);
}

class RandomFlow : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(RandomFlow, CenterRoundingStaysInWindows) {
  const auto sc = fixtures::make_seeded_case(GetParam(), 8);
  const auto r = rerouted_for(sc, Objective::Center);
  const auto net = build_center_flow(sc.inst, r.xp, r.centers);
  ASSERT_TRUE(brute_force_rounding(sc.inst, r.xp, r.centers, Objective::Median).has_value()) << sc.label();
  const auto flow = max_flow_with_lower_bounds(net);
  EXPECT_EQ(flow.value, sc.inst.size());
  const auto a = extract_assignment(net, flow);
  for (int j = 0; j < sc.inst.size(); ++j) EXPECT_GT(r.xp.x(a.center_of[j], j), kPositiveEps);
}

TEST_P(RandomFlow, MinCostMatchesEnumerationAndFractionalCost) {
  const auto sc = fixtures::make_seeded_case(GetParam(), 8);
  for (auto o : {Objective::Median, Objective::Means}) {
    const auto r = rerouted_for(sc, o);
    const auto net = build_medmeans_flow(sc.inst, r.xp, r.centers, o);
    std::int64_t sum = 0;
    for (auto b : net.balance) sum += b;
    EXPECT_EQ(sum, 0);
    const auto a = extract_assignment(net, min_cost_flow(net));
    const double got = assignment_cost_of(sc.inst, a.center_of, o);
    const auto expect = brute_force_rounding(sc.inst, r.xp, r.centers, o);
    ASSERT_TRUE(expect) << sc.label();
    EXPECT_NEAR(got, *expect, 1e-6) << sc.label() << " " << to_string(o);
    EXPECT_LE(got, fractional_cost(sc.inst, r.xp, o) + 1e-6) << sc.label();
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, RandomFlow, ::testing::Range<std::uint64_t>(1, 31));
