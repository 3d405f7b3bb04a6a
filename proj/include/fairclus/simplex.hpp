#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

namespace fairclus {

enum class RowSense { Le, Ge, Eq };

// min cost^T v  s.t. rows, 0 <= v <= upper.
struct LinearProgram {
  struct Row {
    std::vector<std::pair<int, double>> coeffs;
    RowSense sense = RowSense::Le;
    double rhs = 0.0;
  };

  int num_vars = 0;
  std::vector<double> cost;   // empty: pure feasibility problem
  std::vector<double> upper;  // empty or num_vars entries, +inf for none
  std::vector<Row> rows;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> values;
  double objective = 0.0;
  double phase1_residual = 0.0;
  int iterations = 0;
};

struct SimplexOptions {
  double pivot_tol = 1e-9;
  double cost_tol = 1e-9;
  double feasibility_tol = 1e-8;
  int degenerate_streak_for_bland = 50;
  int max_iterations = 200000;
};

// Two-phase primal simplex on a dense tableau. Dantzig pricing, switching
// to Bland's rule during long degenerate streaks so it always terminates.
// Deterministic for a fixed input.
class DenseSimplex {
 public:
  explicit DenseSimplex(SimplexOptions opts = {}) : opts_(opts) {}

  LpResult solve(const LinearProgram& lp) {
    build(lp);
    LpResult result;

    // Phase 1: minimize the sum of artificials.
    std::vector<double> phase1(static_cast<std::size_t>(cols_), 0.0);
    for (int c = first_artificial_; c < cols_; ++c) phase1[c] = 1.0;
    load_objective(phase1);
    const auto s1 = iterate(result.iterations);
    if (s1 == LpStatus::IterationLimit) {
      result.status = s1;
      return result;
    }
    result.phase1_residual = -obj_[cols_];
    if (result.phase1_residual > opts_.feasibility_tol * std::max(1.0, rhs_scale_)) {
      result.status = LpStatus::Infeasible;
      return result;
    }
    drive_out_artificials();

    std::vector<double> phase2(static_cast<std::size_t>(cols_), 0.0);
    if (!lp.cost.empty()) {
      for (int v = 0; v < num_struct_; ++v) phase2[v] = lp.cost[v];
    }
    load_objective(phase2);
    const auto s2 = iterate(result.iterations);
    result.status = s2;
    if (s2 != LpStatus::Optimal) return result;

    result.values.assign(static_cast<std::size_t>(lp.num_vars), 0.0);
    for (int r = 0; r < rows_; ++r) {
      const int b = basis_[r];
      if (b < lp.num_vars) result.values[b] = at(r, cols_);
    }
    double obj = 0.0;
    if (!lp.cost.empty()) {
      for (int v = 0; v < lp.num_vars; ++v) obj += lp.cost[v] * result.values[v];
    }
    result.objective = obj;
    return result;
  }

 private:
  double& at(int r, int c) { return tab_[static_cast<std::size_t>(r) * stride_ + c]; }

  void build(const LinearProgram& lp) {
    num_struct_ = lp.num_vars;
    std::vector<LinearProgram::Row> rows = lp.rows;

    // Finite upper bounds become rows unless an all-nonnegative equality
    // row already implies them.
    if (!lp.upper.empty()) {
      std::vector<double> implied(static_cast<std::size_t>(lp.num_vars), std::numeric_limits<double>::infinity());
      for (const auto& row : lp.rows) {
        if (row.sense != RowSense::Eq || row.rhs < 0) continue;
        bool nonneg = true;
        for (const auto& [v, a] : row.coeffs) nonneg = nonneg && a >= 0;
        if (!nonneg) continue;
        for (const auto& [v, a] : row.coeffs) {
          if (a > 0) implied[v] = std::min(implied[v], row.rhs / a);
        }
      }
      for (int v = 0; v < lp.num_vars; ++v) {
        if (std::isfinite(lp.upper[v]) && implied[v] > lp.upper[v] + 1e-12) {
          rows.push_back({{{v, 1.0}}, RowSense::Le, lp.upper[v]});
        }
      }
    }

    rows_ = static_cast<int>(rows.size());
    int slacks = 0;
    int artificials = 0;
    for (auto& row : rows) {
      if (row.rhs < 0) {
        row.rhs = -row.rhs;
        for (auto& c : row.coeffs) c.second = -c.second;
        if (row.sense == RowSense::Le) {
          row.sense = RowSense::Ge;
        } else if (row.sense == RowSense::Ge) {
          row.sense = RowSense::Le;
        }
      }
      if (row.sense != RowSense::Eq) ++slacks;
      if (row.sense != RowSense::Le) ++artificials;
    }
    first_artificial_ = num_struct_ + slacks;
    cols_ = first_artificial_ + artificials;
    stride_ = static_cast<std::size_t>(cols_) + 1;
    tab_.assign(static_cast<std::size_t>(rows_) * stride_, 0.0);
    basis_.assign(static_cast<std::size_t>(rows_), -1);
    rhs_scale_ = 0.0;

    int next_slack = num_struct_;
    int next_art = first_artificial_;
    for (int r = 0; r < rows_; ++r) {
      const auto& row = rows[r];
      for (const auto& [v, a] : row.coeffs) at(r, v) += a;
      at(r, cols_) = row.rhs;
      rhs_scale_ = std::max(rhs_scale_, row.rhs);
      if (row.sense == RowSense::Le) {
        at(r, next_slack) = 1.0;
        basis_[r] = next_slack++;
      } else {
        if (row.sense == RowSense::Ge) at(r, next_slack++) = -1.0;
        at(r, next_art) = 1.0;
        basis_[r] = next_art++;
      }
    }
  }

  // obj_[c] = reduced cost of column c; obj_[cols_] = -(objective value).
  void load_objective(const std::vector<double>& cost) {
    obj_.assign(stride_, 0.0);
    cost_scale_ = 0.0;
    for (int c = 0; c < cols_; ++c) {
      obj_[c] = cost[c];
      cost_scale_ = std::max(cost_scale_, std::abs(cost[c]));
    }
    for (int r = 0; r < rows_; ++r) {
      const double cb = cost[basis_[r]];
      if (cb == 0.0) continue;
      const double* row = &tab_[static_cast<std::size_t>(r) * stride_];
      for (std::size_t c = 0; c < stride_; ++c) obj_[c] -= cb * row[c];
    }
  }

  void pivot(int r, int q) {
    double* prow = &tab_[static_cast<std::size_t>(r) * stride_];
    const double inv = 1.0 / prow[q];
    nz_.clear();
    for (std::size_t c = 0; c < stride_; ++c) {
      if (prow[c] != 0.0) {
        prow[c] *= inv;
        nz_.push_back(static_cast<int>(c));
      }
    }
    prow[q] = 1.0;
    for (int i = 0; i < rows_; ++i) {
      if (i == r) continue;
      double* row = &tab_[static_cast<std::size_t>(i) * stride_];
      const double f = row[q];
      if (f == 0.0) continue;
      for (int c : nz_) row[c] -= f * prow[c];
      row[q] = 0.0;
    }
    const double f = obj_[q];
    if (f != 0.0) {
      for (int c : nz_) obj_[c] -= f * prow[c];
      obj_[q] = 0.0;
    }
    basis_[r] = q;
  }

  LpStatus iterate(int& iterations) {
    int degenerate_streak = 0;
    const double ctol = opts_.cost_tol * std::max(1.0, cost_scale_);
    // Artificial columns never re-enter the basis.
    const int limit = first_artificial_;
    while (true) {
      if (iterations >= opts_.max_iterations) return LpStatus::IterationLimit;
      const bool bland = degenerate_streak >= opts_.degenerate_streak_for_bland;
      int q = -1;
      double best = -ctol;
      for (int c = 0; c < limit; ++c) {
        if (obj_[c] < best) {
          q = c;
          if (bland) break;
          best = obj_[c];
        }
      }
      if (q < 0) return LpStatus::Optimal;

      int r = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      double best_piv = 0.0;
      for (int i = 0; i < rows_; ++i) {
        const double a = at(i, q);
        if (a <= opts_.pivot_tol) continue;
        const double ratio = std::max(at(i, cols_), 0.0) / a;
        bool take = false;
        if (ratio < best_ratio - 1e-12) {
          take = true;
        } else if (ratio <= best_ratio + 1e-12) {
          take = bland ? basis_[i] < basis_[r] : a > best_piv;
        }
        if (take) {
          r = i;
          best_ratio = std::min(best_ratio, ratio);
          best_piv = a;
        }
      }
      if (r < 0) return LpStatus::Unbounded;
      degenerate_streak = best_ratio <= 1e-12 ? degenerate_streak + 1 : 0;
      pivot(r, q);
      ++iterations;
    }
  }

  void drive_out_artificials() {
    for (int r = 0; r < rows_; ++r) {
      if (basis_[r] < first_artificial_) continue;
      int q = -1;
      double best = 1e-7;
      for (int c = 0; c < first_artificial_; ++c) {
        if (std::abs(at(r, c)) > best) {
          best = std::abs(at(r, c));
          q = c;
        }
      }
      // No candidate: the row is redundant and its artificial stays at zero.
      if (q >= 0) pivot(r, q);
    }
  }

  SimplexOptions opts_;
  int num_struct_ = 0;
  int rows_ = 0;
  int cols_ = 0;
  int first_artificial_ = 0;
  std::size_t stride_ = 0;
  double rhs_scale_ = 1.0;
  double cost_scale_ = 1.0;
  std::vector<double> tab_;
  std::vector<double> obj_;
  std::vector<int> basis_;
  std::vector<int> nz_;
};

}  // namespace fairclus
