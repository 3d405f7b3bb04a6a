#pragma once

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unistd.h>
#include <vector>

#include "json.hpp"

#include "fairclus/constraints.hpp"
#include "fairclus/error.hpp"
#include "fairclus/instance.hpp"

namespace fairclus {

// What a diversity-aware clustering backend promises.
struct DsSolverContract {
  std::string backend_id;
  double alpha_center = 1.0;
  double alpha_median = 1.0;
  double alpha_means = 1.0;
  bool supports_center = true;
  bool supports_median = true;
  bool supports_means = true;
  int max_n = std::numeric_limits<int>::max();
  // False for heuristics: alpha is nominal and no factor is claimed.
  bool has_guarantee = true;

  double alpha(Objective o) const noexcept {
    switch (o) {
      case Objective::Center: return alpha_center;
      case Objective::Median: return alpha_median;
      case Objective::Means: return alpha_means;
    }
    return 1.0;
  }
  bool supports(Objective o) const noexcept {
    switch (o) {
      case Objective::Center: return supports_center;
      case Objective::Median: return supports_median;
      case Objective::Means: return supports_means;
    }
    return false;
  }
};

struct DsSolution {
  std::vector<int> centers;  // sorted, |centers| = k
  double cost = 0.0;         // nearest-center cost under `objective`
  Objective objective = Objective::Center;
  double alpha = 1.0;
  bool has_guarantee = true;
  std::string backend;
};

// Nearest chosen center for every point; ties go to the lowest center id.
// `centers` must be sorted.
inline std::vector<int> nearest_assignment(const MetricInstance& inst, std::span<const int> centers) {
  std::vector<int> phi(static_cast<std::size_t>(inst.size()));
  for (int j = 0; j < inst.size(); ++j) {
    int best = centers[0];
    double best_d = inst(best, j);
    for (std::size_t c = 1; c < centers.size(); ++c) {
      const double d = inst(centers[c], j);
      if (d < best_d) {
        best_d = d;
        best = centers[c];
      }
    }
    phi[j] = best;
  }
  return phi;
}

inline double ds_cost(const MetricInstance& inst, std::span<const int> centers, Objective o) {
  if (centers.empty()) throw Error(ErrorKind::Validation, "ds_cost needs at least one center");
  double cost = 0.0;
  for (int j = 0; j < inst.size(); ++j) {
    double best = std::numeric_limits<double>::infinity();
    for (int c : centers) best = std::min(best, inst(c, j));
    cost = objective_combine(o, cost, objective_term(o, best));
  }
  return cost;
}

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Visits every k-subset of [0, n) in lexicographic order. The visitor gets
// a sorted span; returning false stops the enumeration.
template <typename Visitor>
void for_each_combination(int n, int k, Visitor&& visit) {
  if (k <= 0 || k > n) return;
  std::vector<int> idx(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    if (!visit(std::span<const int>(idx))) return;
    int i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (int t = i + 1; t < k; ++t) idx[t] = idx[t - 1] + 1;
  }
}

inline constexpr double kExactDsMaxSubsets = 1e7;

// Reference backend: exhaustive search over DS-feasible k-subsets (alpha = 1).
inline DsSolution solve_ds_exact(const MetricInstance& inst, const CenterDiversitySpec& ds, Objective o) {
  const int n = inst.size();
  if (binomial(n, ds.k) > kExactDsMaxSubsets) {
    throw Error(ErrorKind::BudgetExceeded, "C(" + std::to_string(n) + "," + std::to_string(ds.k) +
                                               ") subsets exceed the exact backend budget");
  }
  std::optional<DsSolution> best;
  std::vector<int> counts(static_cast<std::size_t>(inst.num_colors()));
  for_each_combination(n, ds.k, [&](std::span<const int> set) {
    std::fill(counts.begin(), counts.end(), 0);
    for (int c : set) ++counts[inst.color(c)];
    for (std::size_t h = 0; h < counts.size(); ++h) {
      if (counts[h] < ds.lower[h] || counts[h] > ds.upper[h]) return true;
    }
    const double cost = ds_cost(inst, set, o);
    if (!best || cost < best->cost) {
      best = DsSolution{{set.begin(), set.end()}, cost, o, 1.0, true, "exact"};
    }
    return true;
  });
  if (!best) throw Error(ErrorKind::Infeasible, "no size-k center set satisfies the diversity bounds");
  return *best;
}

struct DsBackendResult {
  std::vector<int> centers;
  std::optional<double> alpha;
};

class DsBackend {
 public:
  virtual ~DsBackend() = default;
  virtual DsSolverContract contract() const = 0;
  virtual DsBackendResult solve(const MetricInstance& inst, const CenterDiversitySpec& ds, Objective o) = 0;
};

class ExactDsBackend final : public DsBackend {
 public:
  DsSolverContract contract() const override {
    DsSolverContract c;
    c.backend_id = "exact";
    return c;
  }
  DsBackendResult solve(const MetricInstance& inst, const CenterDiversitySpec& ds, Objective o) override {
    return {solve_ds_exact(inst, ds, o).centers, 1.0};
  }
};

// Farthest-first seeding restricted to colors that keep the DS bounds
// reachable, then same-color swaps while the cost improves. No factor claimed.
class GreedyDsBackend final : public DsBackend {
 public:
  explicit GreedyDsBackend(int max_swap_rounds = 50) : max_rounds_(max_swap_rounds) {}

  DsSolverContract contract() const override {
    DsSolverContract c;
    c.backend_id = "greedy";
    c.has_guarantee = false;
    return c;
  }

  DsBackendResult solve(const MetricInstance& inst, const CenterDiversitySpec& ds, Objective o) override {
    const int n = inst.size();
    const int m = inst.num_colors();
    std::vector<int> picked_per_color(static_cast<std::size_t>(m), 0);
    std::vector<char> chosen(static_cast<std::size_t>(n), 0);
    std::vector<int> centers;
    std::vector<double> dist_to_set(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());

    auto color_allowed = [&](int h) {
      if (picked_per_color[h] >= ds.upper[h]) return false;
      int deficit = 0;
      for (int g = 0; g < m; ++g) deficit += std::max(0, ds.lower[g] - picked_per_color[g] - (g == h ? 1 : 0));
      return static_cast<int>(centers.size()) + 1 + deficit <= ds.k;
    };

    while (static_cast<int>(centers.size()) < ds.k) {
      int pick = -1;
      for (int p = 0; p < n; ++p) {
        if (chosen[p] || !color_allowed(inst.color(p))) continue;
        if (pick < 0 || dist_to_set[p] > dist_to_set[pick]) pick = p;
      }
      if (pick < 0) throw Error(ErrorKind::Infeasible, "greedy backend cannot satisfy the diversity bounds");
      chosen[pick] = 1;
      centers.push_back(pick);
      ++picked_per_color[inst.color(pick)];
      for (int p = 0; p < n; ++p) dist_to_set[p] = std::min(dist_to_set[p], inst(pick, p));
    }
    std::sort(centers.begin(), centers.end());

    double cost = ds_cost(inst, centers, o);
    for (int round = 0; round < max_rounds_; ++round) {
      bool improved = false;
      for (std::size_t slot = 0; slot < centers.size(); ++slot) {
        for (int q = 0; q < n; ++q) {
          if (chosen[q] || inst.color(q) != inst.color(centers[slot])) continue;
          auto trial = centers;
          trial[slot] = q;
          std::sort(trial.begin(), trial.end());
          const double c = ds_cost(inst, trial, o);
          if (c < cost - kDistanceEps) {
            chosen[centers[slot]] = 0;
            chosen[q] = 1;
            centers = std::move(trial);
            cost = c;
            improved = true;
            break;
          }
        }
      }
      if (!improved) break;
    }
    return {centers, std::nullopt};
  }

 private:
  int max_rounds_;
};

// External solver: the instance JSON plus "k", "ds" and "objective" keys
// on stdin; {"centers": [...], "alpha": a} expected on stdout, alpha optional.
class SubprocessDsBackend final : public DsBackend {
 public:
  explicit SubprocessDsBackend(std::string command, double claimed_alpha = 1.0)
      : command_(std::move(command)), alpha_(claimed_alpha) {}

  DsSolverContract contract() const override {
    DsSolverContract c;
    c.backend_id = "subprocess:" + command_;
    c.alpha_center = c.alpha_median = c.alpha_means = alpha_;
    c.has_guarantee = false;
    return c;
  }

  DsBackendResult solve(const MetricInstance& inst, const CenterDiversitySpec& ds, Objective o) override {
    auto request = instance_to_json(inst);
    request["k"] = ds.k;
    request["ds"] = {{"lower", ds.lower}, {"upper", ds.upper}};
    request["objective"] = to_string(o);

    char path[] = "/tmp/fairclus-ds-XXXXXX";
    const int fd = mkstemp(path);
    if (fd < 0) throw Error(ErrorKind::Backend, "cannot create temporary file for subprocess backend");
    close(fd);
    {
      std::ofstream out(path);
      out << request.dump();
    }
    const std::string cmd = command_ + " < '" + path + "'";
    std::string output;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) {
      std::remove(path);
      throw Error(ErrorKind::Backend, "cannot launch '" + command_ + "'");
    }
    char buf[4096];
    std::size_t got = 0;
    while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) output.append(buf, got);
    const int status = pclose(pipe);
    std::remove(path);
    if (status != 0) {
      throw Error(ErrorKind::Backend, "'" + command_ + "' exited with status " + std::to_string(status));
    }
    try {
      const auto j = nlohmann::json::parse(output);
      DsBackendResult r;
      r.centers = j.at("centers").get<std::vector<int>>();
      if (j.contains("alpha")) r.alpha = j.at("alpha").get<double>();
      return r;
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::Backend, "unreadable backend output: " + std::string(e.what()));
    }
  }

 private:
  std::string command_;
  double alpha_;
};

// Runs a backend and enforces its contract: exactly k distinct valid centers
// satisfying the diversity bounds.
inline DsSolution solve_ds_plugin(const MetricInstance& inst, const CenterDiversitySpec& ds, Objective o,
                                  DsBackend& backend) {
  const auto contract = backend.contract();
  if (!contract.supports(o)) {
    throw Error(ErrorKind::Backend, contract.backend_id + " does not support objective " + to_string(o));
  }
  if (inst.size() > contract.max_n) {
    throw Error(ErrorKind::BudgetExceeded, contract.backend_id + " accepts at most " +
                                               std::to_string(contract.max_n) + " points");
  }
  auto result = backend.solve(inst, ds, o);
  auto centers = result.centers;
  std::sort(centers.begin(), centers.end());
  if (static_cast<int>(centers.size()) != ds.k) {
    throw Error(ErrorKind::ContractViolation, contract.backend_id + " returned " +
                                                  std::to_string(centers.size()) + " centers, expected " +
                                                  std::to_string(ds.k));
  }
  if (std::adjacent_find(centers.begin(), centers.end()) != centers.end()) {
    throw Error(ErrorKind::ContractViolation, contract.backend_id + " returned duplicate centers");
  }
  for (int c : centers) {
    if (c < 0 || c >= inst.size()) {
      throw Error(ErrorKind::ContractViolation, contract.backend_id + " returned invalid point id " + std::to_string(c));
    }
  }
  if (!check_ds(inst, centers, ds)) {
    throw Error(ErrorKind::ContractViolation, contract.backend_id + " returned centers violating the diversity bounds");
  }
  DsSolution sol;
  sol.cost = ds_cost(inst, centers, o);
  sol.centers = std::move(centers);
  sol.objective = o;
  sol.alpha = result.alpha.value_or(contract.alpha(o));
  // A factor stated in the reply counts as a claim even for backends
  // that make none up front.
  sol.has_guarantee = contract.has_guarantee || result.alpha.has_value();
  sol.backend = contract.backend_id;
  if (sol.alpha < 1.0) throw Error(ErrorKind::ContractViolation, "backend claims alpha < 1");
  return sol;
}

// Builds a backend from a CLI-style id: exact, greedy or subprocess:<cmd>.
inline std::unique_ptr<DsBackend> make_ds_backend(const std::string& id) {
  if (id == "exact") return std::make_unique<ExactDsBackend>();
  if (id == "greedy") return std::make_unique<GreedyDsBackend>();
  const std::string prefix = "subprocess:";
  if (id.rfind(prefix, 0) == 0) return std::make_unique<SubprocessDsBackend>(id.substr(prefix.size()));
  throw Error(ErrorKind::Parse, "unknown ds backend '" + id + "'");
}

}  // namespace fairclus
