#include <gtest/gtest.h>

#include <cmath>

#include "fairclus/io.hpp"
#include "fairclus/oracle.hpp"
#include "fairclus/pipeline.hpp"
#include "support.hpp"

using namespace fairclus;

namespace {

MetricInstance line(std::vector<double> xs, std::vector<int> colors, int m) {
  std::vector<std::vector<double>> coords;
  for (double x : xs) coords.push_back({x});
  return MetricInstance::from_coords(std::move(colors), m, std::move(coords));
}

constexpr Objective kAll[] = {Objective::Center, Objective::Median, Objective::Means};

class FixedBackend final : public DsBackend {
 public:
  explicit FixedBackend(std::vector<int> centers) : centers_(std::move(centers)) {}
  DsSolverContract contract() const override {
    DsSolverContract c;
    c.backend_id = "fixed";
    return c;
  }
  DsBackendResult solve(const MetricInstance&, const CenterDiversitySpec&, Objective) override {
    return {centers_, std::nullopt};
  }

 private:
  std::vector<int> centers_;
};

}  // namespace

TEST(GuaranteeFactor, ExactBackendValues) {
  EXPECT_DOUBLE_EQ(guarantee_factor(Objective::Center, 1.0), 2.0);
  EXPECT_DOUBLE_EQ(guarantee_factor(Objective::Median, 1.0), 4.0);
  EXPECT_NEAR(guarantee_factor(Objective::Means, 1.0), (std::sqrt(5.0) + 1) * (std::sqrt(5.0) + 1), 1e-12);
  EXPECT_NEAR(guarantee_factor(Objective::Means, 1.0), 10.4721, 1e-4);
  EXPECT_DOUBLE_EQ(guarantee_factor(Objective::Center, 3.0), 4.0);
  EXPECT_THROW(guarantee_factor(Objective::Median, 0.5), Error);
}

TEST(Pipeline, TwoPointsTwoColors) {
  const auto inst = line({0, 3}, {0, 1}, 2);
  const CenterDiversitySpec ds{{1, 1}, {1, 1}, 2};
  for (auto o : kAll) {
    const auto r = solve_doubly_fair(inst, GroupFairnessSpec::vacuous(2), ds, o);
    EXPECT_EQ(r.clustering.centers, (std::vector<int>{0, 1}));
    EXPECT_EQ(r.clustering.assignment, (std::vector<int>{0, 1}));
    EXPECT_EQ(r.report.cost, 0.0);
    EXPECT_TRUE(r.report.ds_satisfied);
  }
}

TEST(Pipeline, CoLocatedPointsCostNothing) {
  const auto inst = line({2, 2, 2, 2, 2, 2}, {0, 1, 0, 1, 0, 1}, 2);
  const CenterDiversitySpec ds{{1, 1}, {1, 1}, 2};
  for (auto o : kAll) {
    const auto r = solve_doubly_fair(inst, GroupFairnessSpec::exact_ratios(inst), ds, o);
    EXPECT_EQ(r.report.cost, 0.0);
    EXPECT_LE(r.report.gf_violation, 2.0);
    EXPECT_GE(r.report.min_cluster_size, 1);
  }
}

TEST(Pipeline, CenterReportFields) {
  const auto sc = fixtures::make_seeded_case(11);
  const auto r = solve_doubly_fair(sc.inst, sc.gf, sc.ds, Objective::Center);
  const auto& rep = r.report;
  ASSERT_TRUE(rep.lambda && rep.lambda_lp && rep.lambda_ds && rep.rerouted_radius);
  EXPECT_EQ(*rep.lambda, std::max(*rep.lambda_lp, *rep.lambda_ds));
  EXPECT_LE(*rep.rerouted_radius, 2.0 * *rep.lambda + 1e-9);
  EXPECT_LE(rep.cost, *rep.rerouted_radius + 1e-12);
  EXPECT_EQ(rep.flow_value, sc.inst.size());
  EXPECT_EQ(rep.guarantee, 2.0);
  EXPECT_FALSE(rep.lp_cost.has_value());
  // Both are lower bounds on the optimum.
  const auto opt = brute_force_doubly_fair(sc.inst, sc.gf, sc.ds, Objective::Center);
  EXPECT_LE(rep.lp_lower_bound(), opt.clustering.cost + 1e-9);
  EXPECT_LE(rep.ds_lower_bound(), opt.clustering.cost + 1e-9);
}

TEST(Pipeline, MedMeansReportFields) {
  const auto sc = fixtures::make_seeded_case(12);
  for (auto o : {Objective::Median, Objective::Means}) {
    const auto r = solve_doubly_fair(sc.inst, sc.gf, sc.ds, o);
    const auto& rep = r.report;
    ASSERT_TRUE(rep.lp_cost && rep.rerouted_cost && rep.rerouting_bound);
    EXPECT_LE(*rep.rerouted_cost, *rep.rerouting_bound + 1e-6);
    EXPECT_LE(rep.cost, *rep.rerouted_cost + 1e-6);
    EXPECT_EQ(rep.p_sq.has_value(), o == Objective::Means);
    const auto opt = brute_force_doubly_fair(sc.inst, sc.gf, sc.ds, o);
    EXPECT_LE(*rep.lp_cost, opt.clustering.cost + 1e-7);
  }
}

class PipelineVsOracle : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(PipelineVsOracle, WithinGuarantee) {
  const auto sc = fixtures::make_seeded_case(GetParam());
  for (auto o : kAll) {
    const auto r = solve_doubly_fair(sc.inst, sc.gf, sc.ds, o);
    const auto opt = brute_force_doubly_fair(sc.inst, sc.gf, sc.ds, o);
    // Recomputed from the returned clustering, not from the report.
    const double cost = assignment_cost(sc.inst, r.clustering.assignment, o);
    EXPECT_NEAR(cost, r.report.cost, 1e-9);
    EXPECT_LE(cost, guarantee_factor(o, 1.0) * opt.clustering.cost + 1e-6) << sc.label() << " " << to_string(o);
    EXPECT_TRUE(check_ds(sc.inst, r.clustering.centers, sc.ds));
    EXPECT_LE(gf_violation(sc.inst, r.clustering, sc.gf), 2.0 + 1e-6);
    for (const auto& members : r.clustering.clusters()) EXPECT_FALSE(members.empty());
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, PipelineVsOracle, ::testing::Range<std::uint64_t>(100, 130));

TEST(Pipeline, Deterministic) {
  for (std::uint64_t seed : {3u, 4u, 5u}) {
    const auto sc = fixtures::make_seeded_case(seed);
    for (auto o : kAll) {
      const auto a = solve_doubly_fair(sc.inst, sc.gf, sc.ds, o);
      const auto b = solve_doubly_fair(sc.inst, sc.gf, sc.ds, o);
      EXPECT_EQ(a.clustering.assignment, b.clustering.assignment);
      EXPECT_EQ(report_to_json(a.report, false).dump(), report_to_json(b.report, false).dump());
      EXPECT_EQ(clustering_to_json(a.clustering, sc.inst).dump(), clustering_to_json(b.clustering, sc.inst).dump());
    }
  }
}

TEST(Pipeline, ErrorsNameTheStage) {
  const auto inst = line({0, 1, 2, 3}, {0, 1, 0, 1}, 2);
  const CenterDiversitySpec ds{{1, 1}, {1, 1}, 2};
  FixedBackend broken({0, 2});
  PipelineOptions opts;
  opts.backend = &broken;
  try {
    solve_doubly_fair(inst, GroupFairnessSpec::vacuous(2), ds, Objective::Median, opts);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ContractViolation);
    EXPECT_EQ(e.message().rfind("ds: ", 0), 0u) << e.message();
  }

  const CenterDiversitySpec too_many{{3, 0}, {3, 2}, 3};
  try {
    solve_doubly_fair(inst, GroupFairnessSpec::vacuous(2), too_many, Objective::Center);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Infeasible);
    EXPECT_EQ(e.message().rfind("precheck: ", 0), 0u) << e.message();
    EXPECT_EQ(exit_code_for(e.kind()), 2);
  }
}

TEST(Pipeline, GreedyBackendHasNoGuarantee) {
  const auto sc = fixtures::make_seeded_case(21);
  GreedyDsBackend greedy;
  PipelineOptions opts;
  opts.backend = &greedy;
  for (auto o : kAll) {
    const auto r = solve_doubly_fair(sc.inst, sc.gf, sc.ds, o, opts);
    EXPECT_FALSE(r.report.has_guarantee);
    EXPECT_FALSE(r.report.guarantee.has_value());
    EXPECT_TRUE(report_to_json(r.report)["guarantee_factor"].is_null());
    EXPECT_TRUE(r.report.ds_satisfied);
    EXPECT_LE(r.report.gf_violation, 2.0 + 1e-6);
  }
}

TEST(Pipeline, ReportJsonShape) {
  const auto sc = fixtures::make_seeded_case(7);
  auto r = solve_doubly_fair(sc.inst, sc.gf, sc.ds, Objective::Means);
  const auto with = report_to_json(r.report);
  const auto without = report_to_json(r.report, false);
  EXPECT_TRUE(with.contains("timings_ms"));
  EXPECT_TRUE(with["timings_ms"].contains("lp"));
  EXPECT_FALSE(without.contains("timings_ms"));
  EXPECT_NEAR(without["means_parameters"]["p_sq"].get<double>(), std::sqrt(5.0), 1e-12);
  EXPECT_TRUE(without["oracle"].is_null());
  r.report.oracle_cost = r.report.cost / 2;
  EXPECT_NEAR(report_to_json(r.report)["oracle"]["ratio"].get<double>(), 2.0, 1e-12);
}

TEST(Pipeline, TraceIsConsistent) {
  const auto sc = fixtures::make_seeded_case(8);
  const auto r = solve_doubly_fair(sc.inst, sc.gf, sc.ds, Objective::Median);
  EXPECT_EQ(r.trace.assignment.center_of, r.clustering.assignment);
  EXPECT_EQ(r.trace.network.centers, r.clustering.centers);
  EXPECT_EQ(r.trace.ds.centers, r.clustering.centers);
  EXPECT_EQ(r.trace.flow.value, sc.inst.size());
}
