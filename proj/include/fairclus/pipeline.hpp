#pragma once

#include <chrono>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "fairclus/constraints.hpp"
#include "fairclus/ds_subroutine.hpp"
#include "fairclus/error.hpp"
#include "fairclus/flow.hpp"
#include "fairclus/instance.hpp"
#include "fairclus/log.hpp"
#include "fairclus/lp.hpp"
#include "fairclus/rerouting.hpp"

namespace fairclus {

// Slack for the post-hoc checks on the returned clustering.
inline constexpr double kReportTol = 1e-6;

// Approximation factor of the doubly fair pipeline for a DS backend with factor alpha.
inline double guarantee_factor(Objective o, double alpha) {
  if (alpha < 1.0) throw Error(ErrorKind::Validation, "alpha must be at least 1");
  switch (o) {
    case Objective::Center: return alpha + 1.0;
    case Objective::Median: return alpha + 3.0;
    case Objective::Means: {
      const double s = std::sqrt(1.0 + (std::sqrt(alpha) + 1.0) * (std::sqrt(alpha) + 1.0));
      return (s + 1.0) * (s + 1.0);
    }
  }
  return 0.0;
}

struct SolveReport {
  Objective objective = Objective::Center;
  int n = 0;
  int k = 0;
  double cost = 0.0;

  // k-center
  std::optional<double> lambda;
  std::optional<double> lambda_lp;
  std::optional<double> lambda_ds;
  std::optional<double> rerouted_radius;  // largest d(i,j) on the support of x'
  std::optional<std::int64_t> flow_value;

  // k-median / k-means
  std::optional<double> lp_cost;
  std::optional<double> rerouted_cost;    // cost(x')
  std::optional<double> rerouting_bound;  // 3 lp + ds (median) or the (p,q) bound (means)
  std::optional<double> p_sq;
  std::optional<double> q_sq;

  std::string ds_backend;
  double alpha = 1.0;
  bool has_guarantee = true;
  double ds_cost = 0.0;
  std::optional<double> guarantee;  // unset when the backend claims no factor

  double gf_violation = 0.0;
  bool ds_satisfied = false;
  int min_cluster_size = 0;

  std::optional<double> oracle_cost;

  std::map<std::string, double> timings_ms;

  // Lower bounds on the optimal doubly fair cost implied by this run.
  double lp_lower_bound() const { return lambda ? *lambda : lp_cost.value_or(0.0); }
  double ds_lower_bound() const { return ds_cost / alpha; }

  std::optional<double> oracle_ratio() const {
    if (!oracle_cost) return std::nullopt;
    if (*oracle_cost <= kDistanceEps) return cost <= kDistanceEps ? std::optional<double>(1.0) : std::nullopt;
    return cost / *oracle_cost;
  }
};

// Intermediate objects of one run, kept for dumps and audits.
struct PipelineTrace {
  std::optional<LpModel> lp_model;
  FractionalSolution lp_solution;
  Rerouted rerouted;
  FlowNetwork network;
  IntegralFlow flow;
  IntegralAssignment assignment;
  DsSolution ds;
};

struct SolveResult {
  Clustering clustering;
  SolveReport report;
  PipelineTrace trace;
};

struct PipelineOptions {
  DsBackend* backend = nullptr;  // nullptr: exact enumeration
  double flow_cost_scale = kFlowCostScale;
};

namespace detail {

template <class F>
auto run_stage(const char* stage, std::map<std::string, double>& timings, F&& body) {
  const auto t0 = std::chrono::steady_clock::now();
  log::debug(std::string("stage ") + stage);
  try {
    auto out = body();
    timings[stage] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return out;
  } catch (const Error& e) {
    throw Error(e.kind(), std::string(stage) + ": " + e.message());
  }
}

inline void precheck_or_throw(const MetricInstance& inst, const GroupFairnessSpec& gf,
                              const CenterDiversitySpec& ds) {
  gf.validate(inst.num_colors());
  ds.validate(inst.num_colors());
  const auto pre = feasibility_precheck(inst, gf, ds);
  if (!pre.ok()) throw Error(ErrorKind::Infeasible, pre.summary());
}

inline DsSolution run_ds(const MetricInstance& inst, const CenterDiversitySpec& ds, Objective o,
                         const PipelineOptions& opts) {
  ExactDsBackend fallback;
  DsBackend& backend = opts.backend ? *opts.backend : fallback;
  return solve_ds_plugin(inst, ds, o, backend);
}

// Fills the measured fields and enforces the invariants every output must meet.
inline void audit_output(const MetricInstance& inst, const GroupFairnessSpec& gf, const CenterDiversitySpec& ds,
                         const Clustering& clustering, SolveReport& report) {
  report.cost = clustering.cost;
  report.ds_satisfied = check_ds(inst, clustering.centers, ds);
  if (!report.ds_satisfied) throw Error(ErrorKind::ContractViolation, "final centers violate the diversity bounds");
  const auto clusters = clustering.clusters();
  report.min_cluster_size = inst.size();
  for (const auto& c : clusters) report.min_cluster_size = std::min(report.min_cluster_size, static_cast<int>(c.size()));
  if (report.min_cluster_size == 0) throw Error(ErrorKind::ContractViolation, "a final center received no points");
  report.gf_violation = gf_violation(inst, clustering, gf);
  if (report.gf_violation > 2.0 + kReportTol) {
    throw Error(ErrorKind::ContractViolation, "group fairness violation " + std::to_string(report.gf_violation) +
                                                  " exceeds 2");
  }
}

inline void fill_ds_fields(const DsSolution& ds, SolveReport& report) {
  report.ds_backend = ds.backend;
  report.alpha = ds.alpha;
  report.has_guarantee = ds.has_guarantee;
  report.ds_cost = ds.cost;
  if (ds.has_guarantee) report.guarantee = guarantee_factor(report.objective, ds.alpha);
}

}  // namespace detail

// lambda^DS: smallest candidate radius at least cost_DS / alpha.
inline double snap_ds_radius(const std::vector<double>& radii, double ds_cost_value, double alpha) {
  const double target = ds_cost_value / alpha;
  const auto it = std::lower_bound(radii.begin(), radii.end(), target - kDistanceEps);
  return it == radii.end() ? radii.back() : *it;
}

// DS centers, radius search over LP(r), rerouting onto the DS centers, and
// integral rounding by max flow with lower bounds.
inline SolveResult solve_doubly_fair_kcenter(const MetricInstance& inst, const GroupFairnessSpec& gf,
                                             const CenterDiversitySpec& ds, const PipelineOptions& opts = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  SolveResult out;
  auto& report = out.report;
  auto& trace = out.trace;
  auto& timings = report.timings_ms;
  report.objective = Objective::Center;
  report.n = inst.size();
  report.k = ds.k;

  detail::run_stage("precheck", timings, [&] {
    detail::precheck_or_throw(inst, gf, ds);
    return 0;
  });
  trace.ds = detail::run_stage("ds", timings, [&] { return detail::run_ds(inst, ds, Objective::Center, opts); });
  detail::fill_ds_fields(trace.ds, report);

  const auto radii = pairwise_distance_set(inst);
  report.lambda_ds = snap_ds_radius(radii, trace.ds.cost, trace.ds.alpha);
  report.lambda_lp = detail::run_stage("lambda_search", timings,
                                       [&] { return min_feasible_lambda(inst, gf, ds.k, radii); });
  report.lambda = std::max(*report.lambda_lp, *report.lambda_ds);

  trace.lp_model = build_gf_feasibility_lp(inst, gf, ds.k, *report.lambda);
  trace.lp_solution = detail::run_stage("lp", timings, [&] {
    auto s = solve_lp(*trace.lp_model);
    if (!s) throw Error(ErrorKind::ContractViolation, "LP(lambda) infeasible above the feasible threshold");
    return std::move(*s);
  });

  trace.rerouted = detail::run_stage("reroute", timings,
                                     [&] { return reroute_center(inst, trace.lp_solution, trace.ds.centers); });
  report.rerouted_radius = fractional_cost(inst, trace.rerouted.solution, Objective::Center);

  trace.network = build_center_flow(inst, trace.rerouted.solution, trace.ds.centers);
  trace.flow = detail::run_stage("flow", timings, [&] { return max_flow_with_lower_bounds(trace.network); });
  report.flow_value = trace.flow.value;
  trace.assignment = detail::run_stage("extract", timings, [&] { return extract_assignment(trace.network, trace.flow); });

  out.clustering = make_clustering(inst, trace.assignment.centers, trace.assignment.center_of, Objective::Center);
  detail::run_stage("audit", timings, [&] {
    detail::audit_output(inst, gf, ds, out.clustering, report);
    const double bound = (trace.ds.alpha + 1.0) * *report.lambda;
    if (report.cost > bound + kReportTol) {
      throw Error(ErrorKind::ContractViolation, "cost " + std::to_string(report.cost) +
                                                    " exceeds (alpha+1) lambda = " + std::to_string(bound));
    }
    return 0;
  });
  timings["total"] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

// DS centers, LP-Med / LP-Means, rerouting onto the DS centers, and integral
// rounding by min-cost flow with node balances.
inline SolveResult solve_doubly_fair_medmeans(const MetricInstance& inst, const GroupFairnessSpec& gf,
                                              const CenterDiversitySpec& ds, Objective objective,
                                              const PipelineOptions& opts = {}) {
  if (objective == Objective::Center) {
    throw Error(ErrorKind::Validation, "use solve_doubly_fair_kcenter for the k-center objective");
  }
  const auto t0 = std::chrono::steady_clock::now();
  SolveResult out;
  auto& report = out.report;
  auto& trace = out.trace;
  auto& timings = report.timings_ms;
  report.objective = objective;
  report.n = inst.size();
  report.k = ds.k;

  detail::run_stage("precheck", timings, [&] {
    detail::precheck_or_throw(inst, gf, ds);
    return 0;
  });
  trace.ds = detail::run_stage("ds", timings, [&] { return detail::run_ds(inst, ds, objective, opts); });
  detail::fill_ds_fields(trace.ds, report);
  if (objective == Objective::Means) {
    const auto pq = MeansParameters::for_beta(trace.ds.alpha);
    report.p_sq = pq.p_sq;
    report.q_sq = pq.q_sq;
  }

  trace.lp_model = build_gf_objective_lp(inst, gf, ds.k, objective);
  trace.lp_solution = detail::run_stage("lp", timings, [&] {
    auto s = solve_lp(*trace.lp_model);
    if (!s) throw Error(ErrorKind::Infeasible, "group fairness LP has no solution");
    return std::move(*s);
  });
  report.lp_cost = fractional_cost(inst, trace.lp_solution, objective);

  trace.rerouted = detail::run_stage("reroute", timings,
                                     [&] { return reroute_medmeans(inst, trace.lp_solution, trace.ds.centers); });
  report.rerouted_cost = fractional_cost(inst, trace.rerouted.solution, objective);
  report.rerouting_bound = rerouting_cost_bound(objective, *report.lp_cost, trace.ds.cost, trace.ds.alpha);

  trace.network = build_medmeans_flow(inst, trace.rerouted.solution, trace.ds.centers, objective);
  trace.flow = detail::run_stage("flow", timings, [&] { return min_cost_flow(trace.network, opts.flow_cost_scale); });
  report.flow_value = trace.flow.value;
  trace.assignment = detail::run_stage("extract", timings, [&] { return extract_assignment(trace.network, trace.flow); });

  out.clustering = make_clustering(inst, trace.assignment.centers, trace.assignment.center_of, objective);
  detail::run_stage("audit", timings, [&] {
    detail::audit_output(inst, gf, ds, out.clustering, report);
    const double slack = kReportTol * std::max(1.0, *report.rerouting_bound);
    if (*report.rerouted_cost > *report.rerouting_bound + slack) {
      throw Error(ErrorKind::ContractViolation, "rerouted cost exceeds the rerouting bound");
    }
    return 0;
  });
  timings["total"] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

inline SolveResult solve_doubly_fair(const MetricInstance& inst, const GroupFairnessSpec& gf,
                                     const CenterDiversitySpec& ds, Objective objective,
                                     const PipelineOptions& opts = {}) {
  if (objective == Objective::Center) return solve_doubly_fair_kcenter(inst, gf, ds, opts);
  return solve_doubly_fair_medmeans(inst, gf, ds, objective, opts);
}

inline nlohmann::json report_to_json(const SolveReport& r, bool include_timings = true) {
  using nlohmann::json;
  auto opt = [](const auto& v) -> json { return v ? json(*v) : json(nullptr); };
  json j;
  j["objective"] = to_string(r.objective);
  j["n"] = r.n;
  j["k"] = r.k;
  j["cost"] = r.cost;
  if (r.objective == Objective::Center) {
    j["lambda"] = opt(r.lambda);
    j["lambda_lp"] = opt(r.lambda_lp);
    j["lambda_ds"] = opt(r.lambda_ds);
    j["rerouted_radius"] = opt(r.rerouted_radius);
  } else {
    j["lp_cost"] = opt(r.lp_cost);
    j["rerouted_cost"] = opt(r.rerouted_cost);
    j["rerouting_bound"] = opt(r.rerouting_bound);
  }
  if (r.objective == Objective::Means) j["means_parameters"] = {{"p_sq", opt(r.p_sq)}, {"q_sq", opt(r.q_sq)}};
  j["flow_value"] = opt(r.flow_value);
  j["ds"] = {{"backend", r.ds_backend},
             {"alpha", r.alpha},
             {"has_guarantee", r.has_guarantee},
             {"cost", r.ds_cost},
             {"satisfied", r.ds_satisfied}};
  j["guarantee_factor"] = opt(r.guarantee);
  j["lower_bounds"] = {{"lp", r.lp_lower_bound()}, {"ds", r.ds_lower_bound()}};
  j["gf_violation"] = r.gf_violation;
  j["min_cluster_size"] = r.min_cluster_size;
  if (r.oracle_cost) {
    j["oracle"] = {{"cost", *r.oracle_cost}, {"ratio", opt(r.oracle_ratio())}};
  } else {
    j["oracle"] = nullptr;
  }
  if (include_timings) j["timings_ms"] = r.timings_ms;
  return j;
}

}  // namespace fairclus
