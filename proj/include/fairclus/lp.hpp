#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "fairclus/constraints.hpp"
#include "fairclus/error.hpp"
#include "fairclus/instance.hpp"
#include "fairclus/simplex.hpp"

namespace fairclus {

// Residual tolerance for LP output before repair.
inline constexpr double kLpResidualTol = 1e-7;

// Fractional assignment: x(i, j) is the mass sent from point j to point i
// (row = receiving center, column = source point); y(i) is the opening.
struct FractionalSolution {
  int n = 0;
  std::vector<double> xs;
  std::vector<double> ys;

  FractionalSolution() = default;
  explicit FractionalSolution(int points)
      : n(points), xs(static_cast<std::size_t>(points) * points, 0.0), ys(static_cast<std::size_t>(points), 0.0) {}

  double& x(int i, int j) { return xs[static_cast<std::size_t>(i) * n + j]; }
  double x(int i, int j) const { return xs[static_cast<std::size_t>(i) * n + j]; }
  double& y(int i) { return ys[i]; }
  double y(int i) const { return ys[i]; }

  double mass(int i) const {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += x(i, j);
    return s;
  }
  double column_sum(int j) const {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += x(i, j);
    return s;
  }
};

// Sum over x_ij d(i,j) (median), x_ij d(i,j)^2 (means), or the largest d(i,j)
// on the positive support (center).
inline double fractional_cost(const MetricInstance& inst, const FractionalSolution& s, Objective o) {
  double cost = 0.0;
  for (int i = 0; i < s.n; ++i) {
    for (int j = 0; j < s.n; ++j) {
      const double v = s.x(i, j);
      if (o == Objective::Center) {
        if (v > kPositiveEps) cost = std::max(cost, inst(i, j));
      } else {
        cost += v * objective_term(o, inst(i, j));
      }
    }
  }
  return cost;
}

// Largest violation of each family of LP constraints.
struct LpResiduals {
  double assignment = 0.0;  // |sum_i x_ij - 1|
  double opening = 0.0;     // x_ij - y_i
  double budget = 0.0;      // sum y - k
  double ratio = 0.0;       // color ratio rows
  double radius = 0.0;      // d(i,j) - lambda over the positive support
  double bounds = 0.0;      // outside [0,1]

  double worst() const {
    return std::max({assignment, opening, budget, ratio, bounds});
  }
};

inline LpResiduals lp_residuals(const MetricInstance& inst, const GroupFairnessSpec& gf, int k,
                                const FractionalSolution& s, std::optional<double> lambda = {}) {
  LpResiduals r;
  const int n = s.n;
  const int m = inst.num_colors();
  double ysum = 0.0;
  for (int i = 0; i < n; ++i) {
    ysum += s.y(i);
    r.bounds = std::max({r.bounds, -s.y(i), s.y(i) - 1.0});
    std::vector<double> per_color(static_cast<std::size_t>(m), 0.0);
    double total = 0.0;
    for (int j = 0; j < n; ++j) {
      const double v = s.x(i, j);
      r.bounds = std::max({r.bounds, -v, v - 1.0});
      r.opening = std::max(r.opening, v - s.y(i));
      per_color[inst.color(j)] += v;
      total += v;
      if (lambda && v > kPositiveEps) r.radius = std::max(r.radius, inst(i, j) - *lambda);
    }
    for (int h = 0; h < m; ++h) {
      r.ratio = std::max(r.ratio, per_color[h] - gf.upper[h].value() * total);
      r.ratio = std::max(r.ratio, gf.lower[h].value() * total - per_color[h]);
    }
  }
  for (int j = 0; j < n; ++j) r.assignment = std::max(r.assignment, std::abs(s.column_sum(j) - 1.0));
  r.budget = std::max(0.0, ysum - k);
  return r;
}

struct LpModel {
  int n = 0;
  int k = 0;
  std::optional<double> lambda;     // set for LP(lambda) feasibility models
  std::optional<Objective> objective;  // set for LP-Med / LP-Means
  std::vector<int> x_var;           // n*n, -1 when eliminated
  std::vector<int> y_var;           // n
  std::vector<std::string> var_names;
  std::vector<std::string> row_names;
  LinearProgram program;

  int num_x_vars() const {
    return static_cast<int>(std::count_if(x_var.begin(), x_var.end(), [](int v) { return v >= 0; }));
  }
};

namespace detail {

inline LpModel build_gf_model(const MetricInstance& inst, const GroupFairnessSpec& gf, int k,
                              std::optional<double> lambda, std::optional<Objective> objective) {
  const int n = inst.size();
  const int m = inst.num_colors();
  LpModel model;
  model.n = n;
  model.k = k;
  model.lambda = lambda;
  model.objective = objective;
  model.x_var.assign(static_cast<std::size_t>(n) * n, -1);
  model.y_var.assign(static_cast<std::size_t>(n), -1);

  auto& lp = model.program;
  auto add_var = [&](std::string name, double cost) {
    model.var_names.push_back(std::move(name));
    lp.cost.push_back(cost);
    lp.upper.push_back(1.0);
    return lp.num_vars++;
  };
  // x_ij with d(i,j) > lambda are eliminated rather than fixed to zero.
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double d = inst(i, j);
      if (lambda && d > *lambda + kDistanceEps) continue;
      const double c = objective ? objective_term(*objective, d) : 0.0;
      model.x_var[static_cast<std::size_t>(i) * n + j] =
          add_var("x_" + std::to_string(i) + "_" + std::to_string(j), c);
    }
  }
  for (int i = 0; i < n; ++i) model.y_var[i] = add_var("y_" + std::to_string(i), 0.0);
  if (!objective) lp.cost.clear();

  auto add_row = [&](std::string name, LinearProgram::Row row) {
    model.row_names.push_back(std::move(name));
    lp.rows.push_back(std::move(row));
  };
  auto xv = [&](int i, int j) { return model.x_var[static_cast<std::size_t>(i) * n + j]; };

  for (int j = 0; j < n; ++j) {
    LinearProgram::Row row{{}, RowSense::Eq, 1.0};
    for (int i = 0; i < n; ++i) {
      if (xv(i, j) >= 0) row.coeffs.emplace_back(xv(i, j), 1.0);
    }
    add_row("assign_" + std::to_string(j), std::move(row));
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (xv(i, j) < 0) continue;
      add_row("open_" + std::to_string(i) + "_" + std::to_string(j),
              {{{xv(i, j), 1.0}, {model.y_var[i], -1.0}}, RowSense::Le, 0.0});
    }
  }
  {
    LinearProgram::Row row{{}, RowSense::Le, static_cast<double>(k)};
    for (int i = 0; i < n; ++i) row.coeffs.emplace_back(model.y_var[i], 1.0);
    add_row("budget", std::move(row));
  }
  // sum_{j in P_h} x_ij <= u_h sum_j x_ij  and  >= l_h sum_j x_ij.
  // Rows that no x can violate (u_h = 1, l_h = 0) are omitted.
  for (int i = 0; i < n; ++i) {
    bool any = false;
    for (int j = 0; j < n; ++j) any = any || xv(i, j) >= 0;
    if (!any) continue;
    for (int h = 0; h < m; ++h) {
      const double u = gf.upper[h].value();
      const double l = gf.lower[h].value();
      if (u < 1.0) {
        LinearProgram::Row row{{}, RowSense::Le, 0.0};
        for (int j = 0; j < n; ++j) {
          if (xv(i, j) >= 0) row.coeffs.emplace_back(xv(i, j), (inst.color(j) == h ? 1.0 : 0.0) - u);
        }
        add_row("upper_" + std::to_string(i) + "_" + std::to_string(h), std::move(row));
      }
      if (l > 0.0) {
        LinearProgram::Row row{{}, RowSense::Le, 0.0};
        for (int j = 0; j < n; ++j) {
          if (xv(i, j) >= 0) row.coeffs.emplace_back(xv(i, j), l - (inst.color(j) == h ? 1.0 : 0.0));
        }
        add_row("lower_" + std::to_string(i) + "_" + std::to_string(h), std::move(row));
      }
    }
  }
  return model;
}

}  // namespace detail

// LP(lambda): the group fair k-center feasibility program at radius lambda.
inline LpModel build_gf_feasibility_lp(const MetricInstance& inst, const GroupFairnessSpec& gf, int k,
                                       double lambda) {
  return detail::build_gf_model(inst, gf, k, lambda, std::nullopt);
}

// LP-Med / LP-Means: same constraints without the radius cutoff, minimizing
// sum x_ij d(i,j) or sum x_ij d(i,j)^2.
inline LpModel build_gf_objective_lp(const MetricInstance& inst, const GroupFairnessSpec& gf, int k,
                                     Objective objective) {
  if (objective == Objective::Center) {
    throw Error(ErrorKind::Validation, "k-center uses the feasibility program LP(lambda)");
  }
  return detail::build_gf_model(inst, gf, k, std::nullopt, objective);
}

struct LpSolveOutcome {
  std::optional<FractionalSolution> solution;  // nullopt: certified infeasible
  double objective = 0.0;
  int iterations = 0;
  double raw_residual = 0.0;  // worst row residual before repair
};

// Solves the model, then repairs float noise: negatives clamped to 0, each
// column renormalized to sum to exactly 1, y_i raised to max_j x_ij.
inline LpSolveOutcome solve_lp_detailed(const LpModel& model) {
  DenseSimplex simplex;
  const auto res = simplex.solve(model.program);
  LpSolveOutcome out;
  out.iterations = res.iterations;
  if (res.status == LpStatus::Infeasible) return out;
  if (res.status != LpStatus::Optimal) {
    throw Error(ErrorKind::Numerical, res.status == LpStatus::Unbounded ? "LP reported unbounded"
                                                                        : "LP iteration limit reached");
  }
  // Residuals against the model rows as stated.
  double worst = 0.0;
  for (const auto& row : model.program.rows) {
    double lhs = 0.0;
    for (const auto& [v, a] : row.coeffs) lhs += a * res.values[v];
    const double viol = row.sense == RowSense::Le   ? lhs - row.rhs
                        : row.sense == RowSense::Ge ? row.rhs - lhs
                                                    : std::abs(lhs - row.rhs);
    worst = std::max(worst, viol);
  }
  for (int v = 0; v < model.program.num_vars; ++v) {
    worst = std::max({worst, -res.values[v], res.values[v] - 1.0});
  }
  out.raw_residual = worst;
  if (worst > kLpResidualTol) {
    throw Error(ErrorKind::Numerical, "LP residual " + std::to_string(worst) + " exceeds tolerance");
  }

  const int n = model.n;
  FractionalSolution s(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const int v = model.x_var[static_cast<std::size_t>(i) * n + j];
      if (v >= 0) s.x(i, j) = std::clamp(res.values[v], 0.0, 1.0);
    }
    s.y(i) = std::clamp(res.values[model.y_var[i]], 0.0, 1.0);
  }
  for (int j = 0; j < n; ++j) {
    const double sum = s.column_sum(j);
    if (sum <= 0.0) throw Error(ErrorKind::Numerical, "LP column " + std::to_string(j) + " carries no mass");
    for (int i = 0; i < n; ++i) s.x(i, j) /= sum;
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) s.y(i) = std::max(s.y(i), s.x(i, j));
  }
  out.objective = res.objective;
  out.solution = std::move(s);
  return out;
}

inline std::optional<FractionalSolution> solve_lp(const LpModel& model) {
  return solve_lp_detailed(model).solution;
}

// Smallest r in R with LP(r) feasible, by binary search (feasibility is
// monotone in r). Throws Infeasible when LP(max R) has no solution.
inline double min_feasible_lambda(const MetricInstance& inst, const GroupFairnessSpec& gf, int k,
                                  const std::vector<double>& radii) {
  if (radii.empty()) throw Error(ErrorKind::Validation, "empty candidate radius set");
  auto feasible = [&](double r) { return solve_lp(build_gf_feasibility_lp(inst, gf, k, r)).has_value(); };
  if (!feasible(radii.back())) {
    const auto diag = feasibility_precheck(inst, gf, CenterDiversitySpec::unconstrained(inst.num_colors(), k));
    throw Error(ErrorKind::Infeasible, "group fairness LP infeasible at every radius" +
                                           (diag.ok() ? std::string() : " (" + diag.summary() + ")"));
  }
  std::size_t lo = 0;
  std::size_t hi = radii.size() - 1;  // feasible
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (feasible(radii[mid])) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return radii[hi];
}

// Writes the model in CPLEX LP text format.
inline void write_lp_format(const LpModel& model, std::ostream& out) {
  const auto& lp = model.program;
  out << "\\ fairclus " << (model.objective ? std::string("k-") + to_string(*model.objective) : "feasibility");
  if (model.lambda) out << " lambda=" << *model.lambda;
  out << "\nMinimize\n obj:";
  bool any = false;
  if (!lp.cost.empty()) {
    for (int v = 0; v < lp.num_vars; ++v) {
      if (lp.cost[v] == 0.0) continue;
      out << " + " << lp.cost[v] << " " << model.var_names[v];
      any = true;
    }
  }
  if (!any) out << " 0 " << model.var_names.front();
  out << "\nSubject To\n";
  for (std::size_t r = 0; r < lp.rows.size(); ++r) {
    const auto& row = lp.rows[r];
    out << " " << model.row_names[r] << ":";
    for (const auto& [v, a] : row.coeffs) {
      out << (a < 0 ? " - " : " + ") << std::abs(a) << " " << model.var_names[v];
    }
    out << (row.sense == RowSense::Le ? " <= " : row.sense == RowSense::Ge ? " >= " : " = ") << row.rhs << "\n";
  }
  out << "Bounds\n";
  for (int v = 0; v < lp.num_vars; ++v) out << " 0 <= " << model.var_names[v] << " <= " << lp.upper[v] << "\n";
  out << "End\n";
}

}  // namespace fairclus
