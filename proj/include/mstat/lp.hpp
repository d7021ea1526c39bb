// Copyright 2026 The mstat Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Dense two-phase primal simplex.
//
// The problem
//
//   min cᵀz  s.t.  A_eq z = b_eq,  A_in z <= b_in,  lower <= z <= upper
//
// is brought to standard form (Ā y = b̄, y >= 0, b̄ >= 0) by shifting finite
// lower bounds, reflecting variables that only have an upper bound, splitting
// free variables and adding slacks. Phase one minimizes the sum of one
// artificial per row; phase two starts from the resulting basis. Both phases
// use Bland's rule (smallest eligible column enters, ties in the ratio test go
// to the smallest basic variable), so the method terminates on degenerate
// problems.
//
// The tableau is dense; the intended problem sizes are a few hundred
// variables at most.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "mstat/core_model.hpp"

namespace mstat {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct LinearProgram {
  Vector objective;
  Matrix eq_matrix;
  Vector eq_rhs;
  Matrix ineq_matrix;
  Vector ineq_rhs;
  Vector lower;
  Vector upper;

  // dim free variables, zero objective, no rows.
  static LinearProgram free_variables(Index dim) {
    LinearProgram lp;
    lp.objective = Vector::Zero(dim);
    lp.eq_matrix = Matrix::Zero(0, dim);
    lp.eq_rhs = Vector::Zero(0);
    lp.ineq_matrix = Matrix::Zero(0, dim);
    lp.ineq_rhs = Vector::Zero(0);
    lp.lower = Vector::Constant(dim, -kInf);
    lp.upper = Vector::Constant(dim, kInf);
    return lp;
  }

  Index dim() const { return objective.size(); }

  void add_eq(const Vector& row, double rhs) {
    eq_matrix.conservativeResize(eq_matrix.rows() + 1, dim());
    eq_matrix.row(eq_matrix.rows() - 1) = row.transpose();
    eq_rhs.conservativeResize(eq_rhs.size() + 1);
    eq_rhs(eq_rhs.size() - 1) = rhs;
  }

  void add_ineq(const Vector& row, double rhs) {
    ineq_matrix.conservativeResize(ineq_matrix.rows() + 1, dim());
    ineq_matrix.row(ineq_matrix.rows() - 1) = row.transpose();
    ineq_rhs.conservativeResize(ineq_rhs.size() + 1);
    ineq_rhs(ineq_rhs.size() - 1) = rhs;
  }
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::kOptimal: return "Optimal";
    case LpStatus::kInfeasible: return "Infeasible";
    case LpStatus::kUnbounded: return "Unbounded";
  }
  return "Unknown";
}

struct LpOutcome {
  LpStatus status = LpStatus::kInfeasible;
  Vector solution;  // empty unless Optimal
  double objective_value = 0.0;

  bool optimal() const { return status == LpStatus::kOptimal; }
};

struct LpOptions {
  double solver_tol = 1e-9;
  double pivot_tol = 1e-10;
};

namespace detail {

class SimplexTableau {
 public:
  // a: rows x cols with b >= 0. Artificial columns are appended internally.
  SimplexTableau(const Matrix& a, const Vector& b, const LpOptions& opt)
      : rows_(a.rows()), cols_(a.cols()), opt_(opt) {
    t_ = Matrix::Zero(rows_ + 1, cols_ + rows_ + 1);
    t_.topLeftCorner(rows_, cols_) = a;
    t_.block(0, cols_, rows_, rows_).setIdentity();
    t_.block(0, rhs_col(), rows_, 1) = b;
    basis_.resize(static_cast<std::size_t>(rows_));
    for (Index i = 0; i < rows_; ++i) basis_[static_cast<std::size_t>(i)] = cols_ + i;
    iteration_cap_ = 50 * (cols_ + 2 * rows_ + 1);
  }

  // Returns false if the artificial sum cannot be driven to zero.
  bool phase_one(double feas_threshold) {
    // minimize Σ artificials: reduced cost d_j = -Σ_i t_ij for structural j
    t_.row(rows_).setZero();
    for (Index i = 0; i < rows_; ++i) {
      t_.row(rows_).head(cols_) -= t_.row(i).head(cols_);
      t_(rows_, rhs_col()) -= t_(i, rhs_col());
    }
    if (run(cols_ + rows_) == RunResult::kUnbounded) {
      throw Error(ErrorKind::kNumericalFailure, "phase one reported an unbounded ray");
    }
    if (-t_(rows_, rhs_col()) > feas_threshold) return false;
    // Pivot remaining artificials out wherever a structural column allows it.
    // Rows where no such column exists are redundant and stay inert.
    for (Index i = 0; i < rows_; ++i) {
      if (basis_[static_cast<std::size_t>(i)] < cols_) continue;
      Index best = -1;
      double best_abs = opt_.pivot_tol;
      for (Index j = 0; j < cols_; ++j) {
        if (std::abs(t_(i, j)) > best_abs) {
          best_abs = std::abs(t_(i, j));
          best = j;
        }
      }
      if (best >= 0) pivot(i, best);
    }
    return true;
  }

  // Returns false on unbounded.
  bool phase_two(const Vector& c) {
    t_.row(rows_).setZero();
    t_.row(rows_).head(cols_) = c.transpose();
    for (Index i = 0; i < rows_; ++i) {
      const Index bi = basis_[static_cast<std::size_t>(i)];
      const double cb = bi < cols_ ? c(bi) : 0.0;
      if (cb != 0.0) t_.row(rows_) -= cb * t_.row(i);
    }
    return run(cols_) == RunResult::kOptimal;
  }

  Vector primal() const {
    Vector y = Vector::Zero(cols_);
    for (Index i = 0; i < rows_; ++i) {
      const Index bi = basis_[static_cast<std::size_t>(i)];
      if (bi < cols_) y(bi) = std::max(0.0, t_(i, rhs_col()));
    }
    return y;
  }

 private:
  enum class RunResult { kOptimal, kUnbounded };

  Index rhs_col() const { return cols_ + rows_; }

  RunResult run(Index allowed_cols) {
    const double cost_tol = opt_.pivot_tol;
    for (;;) {
      if (++iterations_ > iteration_cap_) {
        throw Error(ErrorKind::kNumericalFailure,
                    "simplex iteration cap " + std::to_string(iteration_cap_) + " exceeded");
      }
      Index enter = -1;
      for (Index j = 0; j < allowed_cols; ++j) {
        if (t_(rows_, j) < -cost_tol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return RunResult::kOptimal;

      Index leave = -1;
      double best_ratio = kInf;
      for (Index i = 0; i < rows_; ++i) {
        const double a = t_(i, enter);
        if (a <= opt_.pivot_tol) continue;
        const double ratio = t_(i, rhs_col()) / a;
        if (leave < 0) {
          leave = i;
          best_ratio = ratio;
          continue;
        }
        const double eps = 1e-12 * (1.0 + std::abs(best_ratio));
        if (ratio < best_ratio - eps) {
          leave = i;
          best_ratio = ratio;
        } else if (ratio <= best_ratio + eps &&
                   basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)]) {
          leave = i;
          best_ratio = std::min(best_ratio, ratio);
        }
      }
      if (leave < 0) return RunResult::kUnbounded;
      pivot(leave, enter);
    }
  }

  void pivot(Index r, Index c) {
    t_.row(r) /= t_(r, c);
    for (Index i = 0; i <= rows_; ++i) {
      if (i == r) continue;
      const double f = t_(i, c);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
    t_.col(c).setZero();
    t_(r, c) = 1.0;
    basis_[static_cast<std::size_t>(r)] = c;
  }

  Index rows_;
  Index cols_;
  LpOptions opt_;
  Matrix t_;
  std::vector<Index> basis_;
  Index iterations_ = 0;
  Index iteration_cap_ = 0;
};

inline void check_lp(const LinearProgram& lp) {
  const Index d = lp.dim();
  check_matrix(lp.eq_matrix, lp.eq_rhs.size(), d, "eq_matrix");
  check_vector(lp.eq_rhs, lp.eq_matrix.rows(), "eq_rhs");
  check_matrix(lp.ineq_matrix, lp.ineq_rhs.size(), d, "ineq_matrix");
  check_vector(lp.ineq_rhs, lp.ineq_matrix.rows(), "ineq_rhs");
  require(lp.objective.allFinite(), ErrorKind::kInvalidData, "objective has non-finite entries");
  require(lp.lower.size() == d && lp.upper.size() == d, ErrorKind::kDimensionMismatch,
          "bounds do not match the number of variables");
  for (Index j = 0; j < d; ++j) {
    require(!std::isnan(lp.lower(j)) && !std::isnan(lp.upper(j)) && lp.lower(j) < kInf &&
                lp.upper(j) > -kInf,
            ErrorKind::kInvalidData, "invalid bound on variable " + std::to_string(j));
  }
}

}  // namespace detail

inline LpOutcome lp_solve(const LinearProgram& lp, const LpOptions& opt = {}) {
  detail::check_lp(lp);
  const Index d = lp.dim();
  const Index n_eq = lp.eq_matrix.rows();
  const Index n_in = lp.ineq_matrix.rows();

  // z_j = shift_j + sign_j * y_pos(j) - y_neg(j)
  struct Column {
    Index pos = -1;
    Index neg = -1;
    double shift = 0.0;
    double sign = 1.0;
  };
  std::vector<Column> map(static_cast<std::size_t>(d));
  std::vector<Index> boxed;
  Index ncols = 0;
  for (Index j = 0; j < d; ++j) {
    Column& c = map[static_cast<std::size_t>(j)];
    const double lo = lp.lower(j);
    const double hi = lp.upper(j);
    if (lo > hi) return {};
    c.pos = ncols++;
    if (std::isfinite(lo)) {
      c.shift = lo;
      if (std::isfinite(hi)) boxed.push_back(j);
    } else if (std::isfinite(hi)) {
      c.shift = hi;
      c.sign = -1.0;
    } else {
      c.neg = ncols++;
    }
  }
  const Index n_struct = ncols;
  const Index n_rows = n_eq + n_in + static_cast<Index>(boxed.size());
  const Index n_total = n_struct + n_in + static_cast<Index>(boxed.size());

  Matrix a = Matrix::Zero(n_rows, n_total);
  Vector b = Vector::Zero(n_rows);
  Vector shift(d);
  for (Index j = 0; j < d; ++j) shift(j) = map[static_cast<std::size_t>(j)].shift;

  auto emit_row = [&](Index r, const auto& row, double rhs) {
    for (Index j = 0; j < d; ++j) {
      const Column& c = map[static_cast<std::size_t>(j)];
      a(r, c.pos) += c.sign * row(j);
      if (c.neg >= 0) a(r, c.neg) -= row(j);
    }
    b(r) = rhs - row.dot(shift);
  };
  for (Index i = 0; i < n_eq; ++i) emit_row(i, lp.eq_matrix.row(i), lp.eq_rhs(i));
  for (Index i = 0; i < n_in; ++i) {
    emit_row(n_eq + i, lp.ineq_matrix.row(i), lp.ineq_rhs(i));
    a(n_eq + i, n_struct + i) = 1.0;
  }
  for (std::size_t k = 0; k < boxed.size(); ++k) {
    const Index j = boxed[k];
    const Index r = n_eq + n_in + static_cast<Index>(k);
    a(r, map[static_cast<std::size_t>(j)].pos) = 1.0;
    a(r, n_struct + n_in + static_cast<Index>(k)) = 1.0;
    b(r) = lp.upper(j) - lp.lower(j);
  }
  for (Index r = 0; r < n_rows; ++r) {
    if (b(r) < 0) {
      a.row(r) *= -1.0;
      b(r) *= -1.0;
    }
  }

  Vector cost = Vector::Zero(n_total);
  for (Index j = 0; j < d; ++j) {
    const Column& c = map[static_cast<std::size_t>(j)];
    cost(c.pos) += c.sign * lp.objective(j);
    if (c.neg >= 0) cost(c.neg) -= lp.objective(j);
  }

  const double b_scale = 1.0 + (n_rows > 0 ? b.cwiseAbs().maxCoeff() : 0.0);
  detail::SimplexTableau tab(a, b, opt);
  if (!tab.phase_one(opt.solver_tol * b_scale)) return {};
  if (!tab.phase_two(cost)) return {LpStatus::kUnbounded, Vector(), 0.0};

  const Vector y = tab.primal();
  Vector z(d);
  for (Index j = 0; j < d; ++j) {
    const Column& c = map[static_cast<std::size_t>(j)];
    z(j) = c.shift + c.sign * y(c.pos) - (c.neg >= 0 ? y(c.neg) : 0.0);
  }

  // Post-solve verification against the original rows.
  const double z_scale = 1.0 + (d > 0 ? z.cwiseAbs().maxCoeff() : 0.0);
  auto row_scale = [&](const auto& row, double rhs) {
    return opt.solver_tol * (1.0 + std::abs(rhs) + row.cwiseAbs().maxCoeff() * z_scale);
  };
  for (Index i = 0; i < n_eq; ++i) {
    const double r = lp.eq_matrix.row(i).dot(z) - lp.eq_rhs(i);
    if (std::abs(r) > row_scale(lp.eq_matrix.row(i), lp.eq_rhs(i))) {
      throw Error(ErrorKind::kNumericalFailure,
                  "equality row " + std::to_string(i) + " residual " + std::to_string(r));
    }
  }
  for (Index i = 0; i < n_in; ++i) {
    const double r = lp.ineq_matrix.row(i).dot(z) - lp.ineq_rhs(i);
    if (r > row_scale(lp.ineq_matrix.row(i), lp.ineq_rhs(i))) {
      throw Error(ErrorKind::kNumericalFailure,
                  "inequality row " + std::to_string(i) + " residual " + std::to_string(r));
    }
  }
  for (Index j = 0; j < d; ++j) z(j) = std::clamp(z(j), lp.lower(j), lp.upper(j));
  return {LpStatus::kOptimal, z, lp.objective.dot(z)};
}

// Zero-objective wrapper: Optimal means a feasible point was found.
inline LpOutcome lp_feasible(const Matrix& eq_matrix, const Vector& eq_rhs,
                             const Matrix& ineq_matrix, const Vector& ineq_rhs,
                             const Vector& lower, const Vector& upper,
                             const LpOptions& opt = {}) {
  LinearProgram lp;
  const Index d = std::max(eq_matrix.cols(), ineq_matrix.cols());
  lp.objective = Vector::Zero(std::max(d, lower.size()));
  lp.eq_matrix = eq_matrix.rows() == 0 ? Matrix::Zero(0, lp.dim()) : eq_matrix;
  lp.eq_rhs = eq_rhs;
  lp.ineq_matrix = ineq_matrix.rows() == 0 ? Matrix::Zero(0, lp.dim()) : ineq_matrix;
  lp.ineq_rhs = ineq_rhs;
  lp.lower = lower;
  lp.upper = upper;
  return lp_solve(lp, opt);
}

}  // namespace mstat
