#include <gtest/gtest.h>

#include <limits>

#include "fairclus/ds_subroutine.hpp"
#include "fairclus/oracle.hpp"
#include "support.hpp"

using namespace fairclus;

namespace {

MetricInstance line(std::vector<double> xs, std::vector<int> colors, int m) {
  std::vector<std::vector<double>> coords;
  for (double x : xs) coords.push_back({x});
  return MetricInstance::from_coords(std::move(colors), m, std::move(coords));
}

// Every DS-feasible center set times every one of k^n assignments.
double naive_optimum(const MetricInstance& inst, const GroupFairnessSpec& gf, const CenterDiversitySpec& ds,
                     Objective o) {
  const int n = inst.size();
  double best = std::numeric_limits<double>::infinity();
  for_each_combination(n, ds.k, [&](std::span<const int> set) {
    if (!check_ds(inst, set, ds)) return true;
    std::vector<int> digits(static_cast<std::size_t>(n), 0);
    while (true) {
      std::vector<std::vector<int>> clusters(set.size());
      for (int j = 0; j < n; ++j) clusters[digits[j]].push_back(j);
      bool ok = true;
      for (const auto& c : clusters) ok = ok && !c.empty() && check_cluster_group_fair(inst, c, gf);
      if (ok) {
        std::vector<int> assignment(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) assignment[j] = set[digits[j]];
        best = std::min(best, assignment_cost(inst, assignment, o));
      }
      int pos = 0;
      while (pos < n && ++digits[pos] == static_cast<int>(set.size())) digits[pos++] = 0;
      if (pos == n) break;
    }
    return true;
  });
  return best;
}

}  // namespace

TEST(Oracle, EveryPointItsOwnCenter) {
  const auto inst = line({0, 4, 9}, {0, 1, 2}, 3);
  const auto r = brute_force_doubly_fair(inst, GroupFairnessSpec::vacuous(3), {{1, 1, 1}, {1, 1, 1}, 3},
                                         Objective::Median);
  EXPECT_EQ(r.clustering.cost, 0.0);
  EXPECT_EQ(r.clustering.assignment, (std::vector<int>{0, 1, 2}));
}

TEST(Oracle, BalancedLine) {
  const auto inst = line({0, 1, 10, 11}, {0, 1, 0, 1}, 2);
  const auto gf = GroupFairnessSpec::exact_ratios(inst);
  const CenterDiversitySpec ds{{1, 1}, {1, 1}, 2};
  EXPECT_DOUBLE_EQ(brute_force_doubly_fair(inst, gf, ds, Objective::Center).clustering.cost, 1.0);
  EXPECT_DOUBLE_EQ(brute_force_doubly_fair(inst, gf, ds, Objective::Median).clustering.cost, 2.0);
  EXPECT_DOUBLE_EQ(brute_force_doubly_fair(inst, gf, ds, Objective::Means).clustering.cost, 2.0);
}

TEST(OracleAssignment, SingleCenterTakesAll) {
  const auto inst = line({0, 1, 3}, {0, 1, 0}, 2);
  const std::vector<int> c{1};
  const auto r = brute_force_gf_assignment(inst, c, GroupFairnessSpec::exact_ratios(inst), Objective::Median);
  EXPECT_EQ(r.clustering.assignment, (std::vector<int>{1, 1, 1}));
  EXPECT_DOUBLE_EQ(r.clustering.cost, 3.0);
}

TEST(OracleAssignment, VacuousFairnessIsNearestCenter) {
  for (std::uint64_t seed = 1; seed <= 15; ++seed) {
    const auto sc = fixtures::make_seeded_case(seed, 10);
    const std::vector<int> centers{0, sc.inst.size() - 1};
    for (auto o : {Objective::Center, Objective::Median, Objective::Means}) {
      const auto r = brute_force_gf_assignment(sc.inst, centers, GroupFairnessSpec::vacuous(sc.inst.num_colors()), o);
      EXPECT_NEAR(r.clustering.cost, ds_cost(sc.inst, centers, o), 1e-12) << sc.label();
    }
  }
}

TEST(OracleAssignment, InvalidCenters) {
  const auto inst = line({0, 1}, {0, 0}, 1);
  EXPECT_THROW(brute_force_gf_assignment(inst, std::vector<int>{}, GroupFairnessSpec::vacuous(1), Objective::Median),
               Error);
  EXPECT_THROW(brute_force_gf_assignment(inst, std::vector<int>{0, 0}, GroupFairnessSpec::vacuous(1),
                                         Objective::Median),
               Error);
  EXPECT_THROW(brute_force_gf_assignment(inst, std::vector<int>{5}, GroupFairnessSpec::vacuous(1), Objective::Median),
               Error);
}

class OracleAgreement : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(OracleAgreement, PrunedExhaustiveAndNaive) {
  const auto sc = fixtures::make_seeded_case(GetParam(), 8);
  for (auto o : {Objective::Center, Objective::Median, Objective::Means}) {
    const auto pruned = brute_force_doubly_fair(sc.inst, sc.gf, sc.ds, o);
    const auto full = brute_force_doubly_fair(sc.inst, sc.gf, sc.ds, o, {}, OracleSearch::Exhaustive);
    EXPECT_EQ(pruned.clustering.cost, full.clustering.cost) << sc.label();
    EXPECT_EQ(pruned.clustering.assignment, full.clustering.assignment) << sc.label();
    EXPECT_NEAR(pruned.clustering.cost, naive_optimum(sc.inst, sc.gf, sc.ds, o), 1e-9) << sc.label();
    EXPECT_TRUE(check_ds(sc.inst, pruned.clustering.centers, sc.ds));
    EXPECT_EQ(gf_violation(sc.inst, pruned.clustering, sc.gf), 0.0);
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, OracleAgreement, ::testing::Range<std::uint64_t>(1, 21));

TEST(Oracle, BudgetExceeded) {
  const auto sc = fixtures::make_seeded_case(2, 14);
  OracleBudget tiny;
  tiny.max_nodes = 10;
  try {
    brute_force_doubly_fair(sc.inst, sc.gf, sc.ds, Objective::Median, tiny);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BudgetExceeded);
  }
  OracleBudget few_sets;
  few_sets.max_center_sets = 1;
  EXPECT_THROW(brute_force_doubly_fair(sc.inst, sc.gf, sc.ds, Objective::Median, few_sets), Error);
}

TEST(Oracle, InfeasibleInstances) {
  const auto inst = line({0, 1}, {0, 1}, 2);
  GroupFairnessSpec only_red;
  only_red.lower = {Ratio::exact(1, 1), Ratio::exact(0, 1)};
  only_red.upper = {Ratio::exact(1, 1), Ratio::exact(1, 1)};
  try {
    brute_force_doubly_fair(inst, only_red, CenterDiversitySpec::unconstrained(2, 1), Objective::Center);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Infeasible);
  }
  EXPECT_THROW(brute_force_doubly_fair(inst, GroupFairnessSpec::vacuous(2), CenterDiversitySpec::unconstrained(2, 3),
                                       Objective::Center),
               Error);
}
