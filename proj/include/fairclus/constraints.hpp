#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "fairclus/error.hpp"
#include "fairclus/instance.hpp"

namespace fairclus {

// A ratio bound in [0,1]. Exact bounds compare with integer arithmetic;
// approximate ones with kDistanceEps slack.
class Ratio {
 public:
  Ratio() = default;

  static Ratio exact(std::int64_t num, std::int64_t den) {
    if (den <= 0 || num < 0) throw Error(ErrorKind::Validation, "ratio must be a nonnegative fraction");
    const std::int64_t g = std::gcd(num, den);
    Ratio r;
    r.num_ = num / g;
    r.den_ = den / g;
    r.value_ = static_cast<double>(r.num_) / static_cast<double>(r.den_);
    r.exact_ = true;
    return r;
  }

  static Ratio approx(double v) {
    if (!std::isfinite(v)) throw Error(ErrorKind::Validation, "ratio must be finite");
    if (v == 0.0) return exact(0, 1);
    if (v == 1.0) return exact(1, 1);
    Ratio r;
    r.value_ = v;
    r.exact_ = false;
    return r;
  }

  // Accepts a JSON number or a string "a/b".
  static Ratio from_json(const nlohmann::json& j) {
    if (j.is_number()) return approx(j.get<double>());
    if (j.is_string()) {
      const auto s = j.get<std::string>();
      const auto slash = s.find('/');
      if (slash == std::string::npos) return approx(detail::parse_real(s));
      return exact(detail::parse_int(s.substr(0, slash)), detail::parse_int(s.substr(slash + 1)));
    }
    throw Error(ErrorKind::Parse, "ratio must be a number or \"a/b\" string");
  }

  nlohmann::json to_json() const {
    if (exact_ && den_ != 1) return std::to_string(num_) + "/" + std::to_string(den_);
    return value_;
  }

  double value() const noexcept { return value_; }
  bool is_exact() const noexcept { return exact_; }

  // ratio * size <= count
  bool times_le(std::int64_t size, std::int64_t count) const noexcept {
    if (exact_) return num_ * size <= count * den_;
    return value_ * static_cast<double>(size) <= static_cast<double>(count) + kDistanceEps;
  }
  // ratio * size >= count
  bool times_ge(std::int64_t size, std::int64_t count) const noexcept {
    if (exact_) return num_ * size >= count * den_;
    return value_ * static_cast<double>(size) >= static_cast<double>(count) - kDistanceEps;
  }
  // smallest integer c with ratio * size <= c
  std::int64_t ceil_times(std::int64_t size) const noexcept {
    if (exact_) return (num_ * size + den_ - 1) / den_;
    return static_cast<std::int64_t>(std::ceil(value_ * static_cast<double>(size) - kDistanceEps));
  }
  // largest integer c with c <= ratio * size
  std::int64_t floor_times(std::int64_t size) const noexcept {
    if (exact_) return (num_ * size) / den_;
    return static_cast<std::int64_t>(std::floor(value_ * static_cast<double>(size) + kDistanceEps));
  }

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
  double value_ = 0.0;
  bool exact_ = true;
};

struct GroupFairnessSpec {
  std::vector<Ratio> lower;
  std::vector<Ratio> upper;
  int rho = 0;

  int num_colors() const noexcept { return static_cast<int>(lower.size()); }

  static GroupFairnessSpec vacuous(int m) {
    return {std::vector<Ratio>(m, Ratio::exact(0, 1)), std::vector<Ratio>(m, Ratio::exact(1, 1)), 0};
  }

  // l_h = u_h = |P_h| / n.
  static GroupFairnessSpec exact_ratios(const MetricInstance& inst) {
    GroupFairnessSpec gf;
    for (int c : inst.color_counts()) {
      gf.lower.push_back(Ratio::exact(c, inst.size()));
      gf.upper.push_back(Ratio::exact(c, inst.size()));
    }
    return gf;
  }

  void validate(int m) const {
    if (num_colors() != m || static_cast<int>(upper.size()) != m) {
      throw Error(ErrorKind::Validation, "group fairness bounds must have one entry per color");
    }
    if (rho < 0) throw Error(ErrorKind::Validation, "rho must be nonnegative");
    for (int h = 0; h < m; ++h) {
      if (lower[h].value() < 0.0 || upper[h].value() > 1.0 + kDistanceEps ||
          lower[h].value() > upper[h].value() + kDistanceEps) {
        throw Error(ErrorKind::Validation, "need 0 <= lower <= upper <= 1 for color " + std::to_string(h));
      }
    }
  }
};

struct CenterDiversitySpec {
  std::vector<int> lower;
  std::vector<int> upper;
  int k = 0;

  int num_colors() const noexcept { return static_cast<int>(lower.size()); }

  static CenterDiversitySpec unconstrained(int m, int k) {
    return {std::vector<int>(m, 0), std::vector<int>(m, k), k};
  }

  void validate(int m) const {
    if (num_colors() != m || static_cast<int>(upper.size()) != m) {
      throw Error(ErrorKind::Validation, "center diversity bounds must have one entry per color");
    }
    if (k <= 0) throw Error(ErrorKind::Validation, "k must be positive");
    for (int h = 0; h < m; ++h) {
      if (lower[h] < 0 || lower[h] > upper[h]) {
        throw Error(ErrorKind::Validation, "need 0 <= L_h <= U_h for color " + std::to_string(h));
      }
    }
  }
};

enum class Objective { Center, Median, Means };

inline const char* to_string(Objective o) {
  switch (o) {
    case Objective::Center: return "center";
    case Objective::Median: return "median";
    case Objective::Means: return "means";
  }
  return "?";
}

inline Objective parse_objective(const std::string& s) {
  if (s == "center") return Objective::Center;
  if (s == "median") return Objective::Median;
  if (s == "means") return Objective::Means;
  throw Error(ErrorKind::Parse, "unknown objective '" + s + "'");
}

// Contribution of one assignment at distance d to the objective.
inline double objective_term(Objective o, double d) noexcept { return o == Objective::Means ? d * d : d; }

// Combine partial costs: max for k-center, sum otherwise.
inline double objective_combine(Objective o, double acc, double term) noexcept {
  return o == Objective::Center ? std::max(acc, term) : acc + term;
}

inline double assignment_cost(const MetricInstance& inst, std::span<const int> assignment, Objective o) {
  double cost = 0.0;
  for (std::size_t j = 0; j < assignment.size(); ++j) {
    cost = objective_combine(o, cost, objective_term(o, inst(assignment[j], static_cast<int>(j))));
  }
  return cost;
}

struct Clustering {
  std::vector<int> centers;     // sorted
  std::vector<int> assignment;  // point -> center id
  Objective objective = Objective::Center;
  double cost = 0.0;

  // Members of each center, in the order of `centers`.
  std::vector<std::vector<int>> clusters() const {
    std::vector<std::vector<int>> out(centers.size());
    for (std::size_t j = 0; j < assignment.size(); ++j) {
      const auto it = std::lower_bound(centers.begin(), centers.end(), assignment[j]);
      if (it == centers.end() || *it != assignment[j]) {
        throw Error(ErrorKind::Validation, "point " + std::to_string(j) + " assigned to non-center " +
                                               std::to_string(assignment[j]));
      }
      out[static_cast<std::size_t>(it - centers.begin())].push_back(static_cast<int>(j));
    }
    return out;
  }
};

inline Clustering make_clustering(const MetricInstance& inst, std::vector<int> centers,
                                  std::vector<int> assignment, Objective o) {
  std::sort(centers.begin(), centers.end());
  if (static_cast<int>(assignment.size()) != inst.size()) {
    throw Error(ErrorKind::Validation, "assignment must cover every point");
  }
  Clustering c{std::move(centers), std::move(assignment), o, 0.0};
  c.clusters();  // validates that phi maps into C
  c.cost = assignment_cost(inst, c.assignment, o);
  return c;
}

inline std::vector<int> color_histogram(const MetricInstance& inst, std::span<const int> cluster) {
  std::vector<int> counts(static_cast<std::size_t>(inst.num_colors()), 0);
  for (int p : cluster) ++counts[inst.color(p)];
  return counts;
}

// l_h|C| - rho <= |C cap P_h| <= u_h|C| + rho for every color.
inline bool counts_group_fair(std::span<const int> counts, int size, const GroupFairnessSpec& gf) {
  for (std::size_t h = 0; h < counts.size(); ++h) {
    if (!gf.lower[h].times_le(size, counts[h] + gf.rho)) return false;
    if (!gf.upper[h].times_ge(size, counts[h] - gf.rho)) return false;
  }
  return true;
}

inline bool check_cluster_group_fair(const MetricInstance& inst, std::span<const int> cluster,
                                     const GroupFairnessSpec& gf) {
  if (cluster.empty()) throw Error(ErrorKind::EmptyCluster, "group fairness is undefined on an empty cluster");
  const auto counts = color_histogram(inst, cluster);
  return counts_group_fair(counts, static_cast<int>(cluster.size()), gf);
}

// Smallest violation rho* >= 0 under which every cluster is group fair.
inline double gf_violation(const MetricInstance& inst, const Clustering& clustering,
                           const GroupFairnessSpec& gf) {
  double worst = 0.0;
  const auto clusters = clustering.clusters();
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    const auto& members = clusters[c];
    if (members.empty()) {
      throw Error(ErrorKind::EmptyCluster, "center " + std::to_string(clustering.centers[c]) + " has no points");
    }
    const auto counts = color_histogram(inst, members);
    const double size = static_cast<double>(members.size());
    for (std::size_t h = 0; h < counts.size(); ++h) {
      const double cnt = counts[h];
      // Exact bounds that are satisfied contribute nothing; skip float noise.
      if (!(gf.lower[h].is_exact() && gf.lower[h].times_le(members.size(), counts[h]))) {
        worst = std::max(worst, gf.lower[h].value() * size - cnt);
      }
      if (!(gf.upper[h].is_exact() && gf.upper[h].times_ge(members.size(), counts[h]))) {
        worst = std::max(worst, cnt - gf.upper[h].value() * size);
      }
    }
  }
  return std::max(worst, 0.0);
}

inline std::vector<int> center_color_counts(const MetricInstance& inst, std::span<const int> centers) {
  return color_histogram(inst, centers);
}

inline bool check_ds(const MetricInstance& inst, std::span<const int> centers, const CenterDiversitySpec& ds) {
  const auto counts = center_color_counts(inst, centers);
  for (std::size_t h = 0; h < counts.size(); ++h) {
    if (counts[h] < ds.lower[h] || counts[h] > ds.upper[h]) return false;
  }
  return true;
}

struct FeasibilityReport {
  std::vector<std::string> failures;
  bool ok() const noexcept { return failures.empty(); }
  std::string summary() const {
    std::string s;
    for (const auto& f : failures) s += (s.empty() ? "" : "; ") + f;
    return s;
  }
};

// Necessary conditions for a doubly fair solution to exist.
inline FeasibilityReport feasibility_precheck(const MetricInstance& inst, const GroupFairnessSpec& gf,
                                              const CenterDiversitySpec& ds) {
  FeasibilityReport r;
  const int m = inst.num_colors();
  const int sum_l = std::accumulate(ds.lower.begin(), ds.lower.end(), 0);
  const int sum_u = std::accumulate(ds.upper.begin(), ds.upper.end(), 0);
  if (sum_l > ds.k) r.failures.push_back("center lower bounds exceed k");
  if (sum_u < ds.k) r.failures.push_back("k exceeds center upper bounds");
  const auto counts = inst.color_counts();
  for (int h = 0; h < m && h < ds.num_colors(); ++h) {
    if (counts[h] < ds.lower[h]) r.failures.push_back("insufficient points of color " + inst.color_name(h));
  }
  double lo = 0.0;
  double hi = 0.0;
  for (int h = 0; h < gf.num_colors(); ++h) {
    lo += gf.lower[h].value();
    hi += gf.upper[h].value();
  }
  if (lo > 1.0 + kDistanceEps) r.failures.push_back("lower ratios exceed 1");
  if (hi < 1.0 - kDistanceEps) r.failures.push_back("upper ratios sum below 1");
  if (inst.size() < ds.k) r.failures.push_back("fewer points than k");
  return r;
}

struct FairnessSpec {
  GroupFairnessSpec gf;
  CenterDiversitySpec ds;
};

// { "gf": {"lower","upper","rho"}, "ds": {"lower","upper"}, "k", "exact_gf" }
inline FairnessSpec fairness_from_json(const nlohmann::json& j, const MetricInstance& inst,
                                       bool force_exact_gf = false) {
  try {
    FairnessSpec spec;
    const int m = inst.num_colors();
    const int k = j.at("k").get<int>();
    const bool exact_gf = force_exact_gf || j.value("exact_gf", false);
    if (exact_gf) {
      spec.gf = GroupFairnessSpec::exact_ratios(inst);
      if (j.contains("gf")) spec.gf.rho = j.at("gf").value("rho", 0);
    } else if (j.contains("gf")) {
      const auto& g = j.at("gf");
      for (const auto& v : g.at("lower")) spec.gf.lower.push_back(Ratio::from_json(v));
      for (const auto& v : g.at("upper")) spec.gf.upper.push_back(Ratio::from_json(v));
      spec.gf.rho = g.value("rho", 0);
    } else {
      spec.gf = GroupFairnessSpec::vacuous(m);
    }
    if (j.contains("ds")) {
      spec.ds.lower = j.at("ds").at("lower").get<std::vector<int>>();
      spec.ds.upper = j.at("ds").at("upper").get<std::vector<int>>();
      spec.ds.k = k;
    } else {
      spec.ds = CenterDiversitySpec::unconstrained(m, k);
    }
    spec.gf.validate(m);
    spec.ds.validate(m);
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, e.what());
  }
}

inline nlohmann::json fairness_to_json(const FairnessSpec& spec) {
  nlohmann::json j;
  j["k"] = spec.ds.k;
  nlohmann::json lower = nlohmann::json::array();
  nlohmann::json upper = nlohmann::json::array();
  for (const auto& r : spec.gf.lower) lower.push_back(r.to_json());
  for (const auto& r : spec.gf.upper) upper.push_back(r.to_json());
  j["gf"] = {{"lower", lower}, {"upper", upper}, {"rho", spec.gf.rho}};
  j["ds"] = {{"lower", spec.ds.lower}, {"upper", spec.ds.upper}};
  return j;
}

}  // namespace fairclus
