#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairclus/constraints.hpp"
#include "fairclus/ds_subroutine.hpp"
#include "fairclus/error.hpp"
#include "fairclus/instance.hpp"

namespace fairclus {

struct OracleBudget {
  std::int64_t max_center_sets = 10'000'000;
  std::int64_t max_nodes = 4'000'000'000;  // search nodes over all center sets
  double max_seconds = 600.0;
};

// Pruned: branch and bound with cost and color-count cuts, hardest points
// first. Exhaustive: every assignment in point-id order, no cuts.
enum class OracleSearch { Pruned, Exhaustive };

struct OracleStats {
  std::int64_t center_sets = 0;
  std::int64_t nodes = 0;
};

struct OracleResult {
  Clustering clustering;
  OracleStats stats;
};

namespace detail {

// Best solution so far. Costs within the tolerance count as ties, broken
// by the lexicographically smaller assignment vector.
struct OracleIncumbent {
  bool found = false;
  double cost = std::numeric_limits<double>::infinity();
  std::vector<int> assignment;

  static double tolerance(double cost) { return 1e-9 * (1.0 + std::abs(cost)); }

  bool offer(double c, const std::vector<int>& a) {
    if (found) {
      if (c > cost + tolerance(cost)) return false;
      if (c >= cost - tolerance(cost) && !std::lexicographical_compare(a.begin(), a.end(), assignment.begin(),
                                                                       assignment.end())) {
        return false;
      }
    }
    found = true;
    cost = c;
    assignment = a;
    return true;
  }

  // Partial solutions whose lower bound exceeds this cannot win or tie.
  double cutoff() const { return found ? cost + tolerance(cost) : std::numeric_limits<double>::infinity(); }
};

class OracleClock {
 public:
  OracleClock(const OracleBudget& budget, OracleStats& stats)
      : budget_(budget), stats_(stats), start_(std::chrono::steady_clock::now()) {}

  void tick() {
    if (++stats_.nodes > budget_.max_nodes) throw Error(ErrorKind::BudgetExceeded, "oracle node budget exhausted");
    if ((stats_.nodes & 0x3FFF) == 0) {
      const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
      if (s > budget_.max_seconds) throw Error(ErrorKind::BudgetExceeded, "oracle time budget exhausted");
    }
  }

 private:
  const OracleBudget& budget_;
  OracleStats& stats_;
  std::chrono::steady_clock::time_point start_;
};

class AssignmentSearch {
 public:
  AssignmentSearch(const MetricInstance& inst, std::span<const int> centers, const GroupFairnessSpec& gf,
                   Objective o, OracleSearch mode, OracleClock& clock, OracleIncumbent& best)
      : inst_(inst),
        centers_(centers.begin(), centers.end()),
        gf_(gf),
        o_(o),
        mode_(mode),
        clock_(clock),
        best_(best),
        n_(inst.size()),
        k_(static_cast<int>(centers.size())),
        m_(inst.num_colors()) {
    order_.resize(static_cast<std::size_t>(n_));
    std::iota(order_.begin(), order_.end(), 0);
    choices_.assign(static_cast<std::size_t>(n_), {});
    std::vector<double> nearest(static_cast<std::size_t>(n_), std::numeric_limits<double>::infinity());
    for (int j = 0; j < n_; ++j) {
      auto& ch = choices_[j];
      ch.resize(static_cast<std::size_t>(k_));
      std::iota(ch.begin(), ch.end(), 0);
      for (int c = 0; c < k_; ++c) nearest[j] = std::min(nearest[j], objective_term(o_, inst_(centers_[c], j)));
      if (mode_ == OracleSearch::Pruned) {
        std::stable_sort(ch.begin(), ch.end(), [&](int a, int b) {
          return inst_(centers_[a], j) < inst_(centers_[b], j);
        });
      }
    }
    if (mode_ == OracleSearch::Pruned) {
      std::stable_sort(order_.begin(), order_.end(), [&](int a, int b) { return nearest[a] > nearest[b]; });
    }
    suffix_bound_.assign(static_cast<std::size_t>(n_) + 1, 0.0);
    for (int pos = n_ - 1; pos >= 0; --pos) {
      suffix_bound_[pos] = objective_combine(o_, suffix_bound_[pos + 1], nearest[order_[pos]]);
    }
    size_.assign(static_cast<std::size_t>(k_), 0);
    counts_.assign(static_cast<std::size_t>(k_) * m_, 0);
    remaining_ = inst.color_counts();
    assignment_.assign(static_cast<std::size_t>(n_), -1);
  }

  void run() { descend(0, 0.0, k_); }

 private:
  void descend(int pos, double partial, int empty) {
    clock_.tick();
    if (pos == n_) {
      finish();
      return;
    }
    if (mode_ == OracleSearch::Pruned) {
      if (empty > n_ - pos) return;
      if (objective_combine(o_, partial, suffix_bound_[pos]) > best_.cutoff()) return;
      for (int c = 0; c < k_; ++c) {
        if (!completable(c)) return;
      }
    }
    const int j = order_[pos];
    const int h = inst_.color(j);
    --remaining_[h];
    for (int c : choices_[j]) {
      assignment_[j] = centers_[c];
      const int was_empty = size_[c] == 0 ? 1 : 0;
      ++size_[c];
      ++counts_[c * m_ + h];
      descend(pos + 1, objective_combine(o_, partial, objective_term(o_, inst_(centers_[c], j))), empty - was_empty);
      --size_[c];
      --counts_[c * m_ + h];
    }
    ++remaining_[h];
    assignment_[j] = -1;
  }

  // Some final size s >= max(1, current) admits per-color counts within the
  // ratio bounds using only the points still unassigned.
  bool completable(int c) const {
    const int size0 = size_[c];
    int free = 0;
    for (int h = 0; h < m_; ++h) free += remaining_[h];
    for (int s = std::max(1, size0); s <= size0 + free; ++s) {
      std::int64_t lo_total = 0;
      std::int64_t hi_total = 0;
      bool ok = true;
      for (int h = 0; h < m_ && ok; ++h) {
        const std::int64_t a = counts_[c * m_ + h];
        const std::int64_t lo = std::max(a, gf_.lower[h].ceil_times(s) - gf_.rho);
        const std::int64_t hi = std::min(a + remaining_[h], gf_.upper[h].floor_times(s) + gf_.rho);
        ok = lo <= hi;
        lo_total += lo;
        hi_total += hi;
      }
      if (ok && lo_total <= s && s <= hi_total) return true;
    }
    return false;
  }

  void finish() {
    for (int c = 0; c < k_; ++c) {
      if (size_[c] == 0) return;
      if (!counts_group_fair(std::span<const int>(&counts_[c * m_], static_cast<std::size_t>(m_)), size_[c], gf_)) {
        return;
      }
    }
    best_.offer(assignment_cost(inst_, assignment_, o_), assignment_);
  }

  const MetricInstance& inst_;
  std::vector<int> centers_;
  const GroupFairnessSpec& gf_;
  Objective o_;
  OracleSearch mode_;
  OracleClock& clock_;
  OracleIncumbent& best_;
  int n_;
  int k_;
  int m_;
  std::vector<int> order_;
  std::vector<std::vector<int>> choices_;
  std::vector<double> suffix_bound_;
  std::vector<int> size_;
  std::vector<int> counts_;
  std::vector<int> remaining_;
  std::vector<int> assignment_;
};

inline OracleResult oracle_result(const MetricInstance& inst, const OracleIncumbent& best, Objective o,
                                  const OracleStats& stats) {
  std::vector<int> centers = best.assignment;
  std::sort(centers.begin(), centers.end());
  centers.erase(std::unique(centers.begin(), centers.end()), centers.end());
  return {make_clustering(inst, std::move(centers), best.assignment, o), stats};
}

}  // namespace detail

// Optimal assignment of every point to the given centers such that every
// cluster is nonempty and group fair.
inline OracleResult brute_force_gf_assignment(const MetricInstance& inst, std::span<const int> centers,
                                              const GroupFairnessSpec& gf, Objective o,
                                              const OracleBudget& budget = {},
                                              OracleSearch mode = OracleSearch::Pruned) {
  gf.validate(inst.num_colors());
  std::vector<int> sorted(centers.begin(), centers.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.empty() || std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw Error(ErrorKind::Validation, "centers must be nonempty and distinct");
  }
  for (int c : sorted) {
    if (c < 0 || c >= inst.size()) throw Error(ErrorKind::IndexOutOfRange, "center id " + std::to_string(c));
  }
  OracleStats stats;
  detail::OracleClock clock(budget, stats);
  detail::OracleIncumbent best;
  stats.center_sets = 1;
  detail::AssignmentSearch(inst, sorted, gf, o, mode, clock, best).run();
  if (!best.found) throw Error(ErrorKind::Infeasible, "no group fair assignment to these centers");
  return detail::oracle_result(inst, best, o, stats);
}

// Optimal doubly fair clustering: every DS-feasible k-subset of centers,
// every assignment with nonempty group fair clusters.
inline OracleResult brute_force_doubly_fair(const MetricInstance& inst, const GroupFairnessSpec& gf,
                                            const CenterDiversitySpec& ds, Objective o,
                                            const OracleBudget& budget = {},
                                            OracleSearch mode = OracleSearch::Pruned) {
  gf.validate(inst.num_colors());
  ds.validate(inst.num_colors());
  const int n = inst.size();
  if (ds.k < 1 || ds.k > n) throw Error(ErrorKind::Infeasible, "need 1 <= k <= n");
  if (binomial(n, ds.k) > static_cast<double>(budget.max_center_sets)) {
    throw Error(ErrorKind::BudgetExceeded, "too many center sets for the oracle");
  }
  OracleStats stats;
  detail::OracleClock clock(budget, stats);
  detail::OracleIncumbent best;
  for_each_combination(n, ds.k, [&](std::span<const int> set) {
    if (!check_ds(inst, set, ds)) return true;
    ++stats.center_sets;
    detail::AssignmentSearch(inst, set, gf, o, mode, clock, best).run();
    return true;
  });
  if (!best.found) throw Error(ErrorKind::Infeasible, "no doubly fair clustering exists");
  return detail::oracle_result(inst, best, o, stats);
}

}  // namespace fairclus
