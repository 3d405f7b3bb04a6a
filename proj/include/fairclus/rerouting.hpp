#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "json.hpp"

#include "fairclus/constraints.hpp"
#include "fairclus/error.hpp"
#include "fairclus/instance.hpp"
#include "fairclus/lp.hpp"

namespace fairclus {

enum class RerouteMode { Center, MedMeans };

struct ReroutePlan {
  RerouteMode mode = RerouteMode::Center;
  std::vector<int> centers;                    // C_DS, sorted
  std::vector<std::vector<int>> neighborhoods;  // N(c) per center, same order as `centers`
  std::vector<int> theta;                      // nearest-center target per point; -1 if unused
  // MedMeans: share r^c_p of p's incoming mass that came from c, row-major
  // [center index][point]. Center mode: x_pc / sum_{c' : p in N(c')} x_pc'.
  std::vector<double> ratios;
  std::vector<double> residual;  // MedMeans: 1 - sum_c r^c_p per point
};

struct Rerouted {
  FractionalSolution solution;  // (x', y')
  ReroutePlan plan;
};

// theta(p) = p for p in C_DS, otherwise the closest center (lowest id on ties).
inline int nearest_center_target(const MetricInstance& inst, std::span<const int> centers, int p) {
  if (std::binary_search(centers.begin(), centers.end(), p)) return p;
  int best = centers[0];
  double best_d = inst(best, p);
  for (std::size_t c = 1; c < centers.size(); ++c) {
    const double d = inst(centers[c], p);
    if (d < best_d) {
      best_d = d;
      best = centers[c];
    }
  }
  return best;
}

namespace detail {

inline std::vector<int> checked_centers(const FractionalSolution& x, std::span<const int> centers) {
  std::vector<int> out(centers.begin(), centers.end());
  std::sort(out.begin(), out.end());
  if (out.empty()) throw Error(ErrorKind::Validation, "rerouting needs at least one center");
  if (std::adjacent_find(out.begin(), out.end()) != out.end()) {
    throw Error(ErrorKind::Validation, "duplicate centers");
  }
  for (int c : out) {
    if (c < 0 || c >= x.n) throw Error(ErrorKind::IndexOutOfRange, "center id " + std::to_string(c));
  }
  return out;
}

inline std::size_t center_index(const std::vector<int>& centers, int c) {
  return static_cast<std::size_t>(std::lower_bound(centers.begin(), centers.end(), c) - centers.begin());
}

}  // namespace detail

// k-center rerouting. Mass arriving at a point p in N(C_DS) is split among
// the centers sending mass to p, proportionally to what each sends; all
// other incoming mass moves to theta(p).
inline Rerouted reroute_center(const MetricInstance& inst, const FractionalSolution& x,
                               std::span<const int> center_ids) {
  const int n = x.n;
  Rerouted out;
  auto& plan = out.plan;
  plan.mode = RerouteMode::Center;
  plan.centers = detail::checked_centers(x, center_ids);
  const auto& centers = plan.centers;
  const std::size_t k = centers.size();

  // Denominator per p over centers with p in N(c). A p whose denominator
  // is below the support threshold is handled by theta instead.
  std::vector<double> denom(static_cast<std::size_t>(n), 0.0);
  for (int p = 0; p < n; ++p) {
    for (int c : centers) {
      if (x.x(p, c) > kPositiveEps) denom[p] += x.x(p, c);
    }
  }
  std::vector<char> in_neighborhood(static_cast<std::size_t>(n), 0);
  for (int p = 0; p < n; ++p) in_neighborhood[p] = denom[p] > kPositiveEps;

  plan.neighborhoods.assign(k, {});
  plan.ratios.assign(k * n, 0.0);
  for (std::size_t ci = 0; ci < k; ++ci) {
    for (int p = 0; p < n; ++p) {
      if (in_neighborhood[p] && x.x(p, centers[ci]) > kPositiveEps) {
        plan.neighborhoods[ci].push_back(p);
        plan.ratios[ci * n + p] = x.x(p, centers[ci]) / denom[p];
      }
    }
  }
  plan.theta.assign(static_cast<std::size_t>(n), -1);
  for (int p = 0; p < n; ++p) {
    if (!in_neighborhood[p]) plan.theta[p] = nearest_center_target(inst, centers, p);
  }

  FractionalSolution& xp = out.solution;
  xp = FractionalSolution(n);
  for (std::size_t ci = 0; ci < k; ++ci) {
    const int c = centers[ci];
    xp.y(c) = 1.0;
    for (int p : plan.neighborhoods[ci]) {
      const double share = plan.ratios[ci * n + p];
      for (int j = 0; j < n; ++j) xp.x(c, j) += share * x.x(p, j);
    }
  }
  for (int p = 0; p < n; ++p) {
    const int target = plan.theta[p];
    if (target < 0) continue;
    for (int j = 0; j < n; ++j) xp.x(target, j) += x.x(p, j);
  }
  return out;
}

// k-median / k-means rerouting. Each center c takes back r^c_p of the mass
// arriving at p, r^c_p = x_pc / sum_l x_pl; the rest goes to theta(p).
inline Rerouted reroute_medmeans(const MetricInstance& inst, const FractionalSolution& x,
                                 std::span<const int> center_ids) {
  const int n = x.n;
  Rerouted out;
  auto& plan = out.plan;
  plan.mode = RerouteMode::MedMeans;
  plan.centers = detail::checked_centers(x, center_ids);
  const auto& centers = plan.centers;
  const std::size_t k = centers.size();

  std::vector<double> incoming(static_cast<std::size_t>(n), 0.0);
  for (int p = 0; p < n; ++p) {
    for (int l = 0; l < n; ++l) incoming[p] += x.x(p, l);
  }
  plan.neighborhoods.assign(k, {});
  plan.ratios.assign(k * n, 0.0);
  plan.residual.assign(static_cast<std::size_t>(n), 1.0);
  for (std::size_t ci = 0; ci < k; ++ci) {
    for (int p = 0; p < n; ++p) {
      const double v = x.x(p, centers[ci]);
      if (v > kPositiveEps && incoming[p] > 0.0) {
        plan.neighborhoods[ci].push_back(p);
        plan.ratios[ci * n + p] = v / incoming[p];
        plan.residual[p] -= plan.ratios[ci * n + p];
      }
    }
  }
  plan.theta.assign(static_cast<std::size_t>(n), -1);
  for (int p = 0; p < n; ++p) {
    plan.residual[p] = std::max(plan.residual[p], 0.0);
    if (incoming[p] > 0.0) plan.theta[p] = nearest_center_target(inst, centers, p);
  }

  FractionalSolution& xp = out.solution;
  xp = FractionalSolution(n);
  for (std::size_t ci = 0; ci < k; ++ci) {
    const int c = centers[ci];
    xp.y(c) = 1.0;
    for (int p : plan.neighborhoods[ci]) {
      const double share = plan.ratios[ci * n + p];
      for (int j = 0; j < n; ++j) xp.x(c, j) += share * x.x(p, j);
    }
  }
  for (int p = 0; p < n; ++p) {
    const int target = plan.theta[p];
    if (target < 0 || plan.residual[p] <= 0.0) continue;
    for (int j = 0; j < n; ++j) xp.x(target, j) += plan.residual[p] * x.x(p, j);
  }
  return out;
}

// p^2 and q^2 for the k-means cost bound given the DS factor beta.
struct MeansParameters {
  double p_sq = 0.0;
  double q_sq = 0.0;

  static MeansParameters for_beta(double beta) {
    const double rb = std::sqrt(beta);
    return {std::sqrt(1.0 + (1.0 + rb) * (1.0 + rb)), rb};
  }
  // Coefficient of cost^2(x, y).
  double lp_coefficient() const { return 1.0 + p_sq + (1.0 + 1.0 / p_sq) * (2.0 + q_sq); }
  // Coefficient of cost^2(x^DS, y^DS).
  double ds_coefficient() const { return (1.0 + 1.0 / p_sq) * (1.0 + 1.0 / q_sq); }
};

// Upper bound on the rerouted cost: 3 cost(x,y) + cost(DS) for k-median,
// the (p, q) bound for k-means.
inline double rerouting_cost_bound(Objective o, double lp_cost, double ds_cost_value, double beta = 1.0) {
  if (o == Objective::Median) return 3.0 * lp_cost + ds_cost_value;
  if (o == Objective::Means) {
    const auto pq = MeansParameters::for_beta(beta);
    return pq.lp_coefficient() * lp_cost + pq.ds_coefficient() * ds_cost_value;
  }
  throw Error(ErrorKind::Validation, "no rerouting cost bound for k-center");
}

inline nlohmann::json rerouting_to_json(const Rerouted& r) {
  nlohmann::json j;
  const auto& plan = r.plan;
  const int n = r.solution.n;
  j["mode"] = plan.mode == RerouteMode::Center ? "center" : "medmeans";
  j["centers"] = plan.centers;
  j["neighborhoods"] = plan.neighborhoods;
  j["theta"] = plan.theta;
  std::vector<std::vector<double>> ratios(plan.centers.size(), std::vector<double>(static_cast<std::size_t>(n)));
  for (std::size_t ci = 0; ci < plan.centers.size(); ++ci) {
    for (int p = 0; p < n; ++p) ratios[ci][p] = plan.ratios[ci * n + p];
  }
  j["ratios"] = ratios;
  if (!plan.residual.empty()) j["residual"] = plan.residual;
  std::vector<std::vector<double>> xs(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n)));
  for (int i = 0; i < n; ++i) {
    for (int jj = 0; jj < n; ++jj) xs[i][jj] = r.solution.x(i, jj);
  }
  j["x"] = xs;
  j["y"] = r.solution.ys;
  return j;
}

}  // namespace fairclus
