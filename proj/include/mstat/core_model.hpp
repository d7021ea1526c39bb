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

// Point data model for complementarity-constrained programs
//
//   min f(x)  s.t.  g(x) <= 0,  h(x) = 0,  G(x) >= 0,  H(x) >= 0,  G(x)^T H(x) = 0
//
// Everything downstream works on first-order information at a single point
// x̄. Gradients of a vector-valued map are stored as the rows of a matrix, so
// grad_g.row(i) is ∇g_i(x̄).

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "mstat/errors.hpp"

namespace mstat {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

struct FirstOrderData {
  Index n = 0;
  Index l = 0;
  Index m = 0;
  Index p = 0;
  Vector grad_f;
  Vector g_vals;
  Matrix grad_g;
  Vector h_vals;
  Matrix grad_h;
  Vector G_vals;
  Matrix grad_G;
  Vector H_vals;
  Matrix grad_H;

  // Zero-initialized data of the given shape.
  static FirstOrderData zeros(Index n, Index l, Index m, Index p) {
    FirstOrderData d;
    d.n = n;
    d.l = l;
    d.m = m;
    d.p = p;
    d.grad_f = Vector::Zero(n);
    d.g_vals = Vector::Zero(l);
    d.grad_g = Matrix::Zero(l, n);
    d.h_vals = Vector::Zero(m);
    d.grad_h = Matrix::Zero(m, n);
    d.G_vals = Vector::Zero(p);
    d.grad_G = Matrix::Zero(p, n);
    d.H_vals = Vector::Zero(p);
    d.grad_H = Matrix::Zero(p, n);
    return d;
  }
};

// g(x) = A_g x + b_g and so on; the objective is ½ xᵀQx + cᵀx.
struct AffineInstance {
  Matrix Q;
  Vector c;
  Matrix A_g;
  Vector b_g;
  Matrix A_h;
  Vector b_h;
  Matrix A_G;
  Vector b_G;
  Matrix A_H;
  Vector b_H;

  Index n() const { return c.size(); }
  Index l() const { return b_g.size(); }
  Index m() const { return b_h.size(); }
  Index p() const { return b_G.size(); }
};

struct Tolerances {
  double active_tol = 1e-8;
  double feas_tol = 1e-8;
  double solver_tol = 1e-9;
  double cert_tol = 1e-7;
};

enum class PairState { kPlusZero, kZeroPlus, kZeroZero };

// Active structure at x̄. All index lists are 0-based and sorted.
struct IndexSets {
  std::vector<Index> active_g;
  std::vector<Index> plus_zero;
  std::vector<Index> zero_plus;
  std::vector<Index> zero_zero;
  // Per-constraint lookups, sized l and p respectively.
  std::vector<bool> g_is_active;
  std::vector<PairState> pair;

  bool is_active_g(Index i) const { return g_is_active[static_cast<std::size_t>(i)]; }
  PairState state(Index i) const { return pair[static_cast<std::size_t>(i)]; }
  const std::vector<Index>& biactive() const { return zero_zero; }
};

struct Violation {
  std::string constraint;  // "g_1", "h_2", "G_1", "H_3", "comp_1" (1-based)
  double amount = 0.0;
};

struct FeasibilityReport {
  bool feasible = true;
  double max_violation = 0.0;
  double complementarity_violation = 0.0;
  std::string worst;  // empty when nothing is violated
  std::vector<Violation> violations;  // every constraint with a positive violation
};

namespace detail {

inline void require(bool ok, ErrorKind kind, const std::string& what) {
  if (!ok) throw Error(kind, what);
}

inline void check_vector(const Vector& v, Index len, const std::string& name) {
  require(v.size() == len, ErrorKind::kDimensionMismatch,
          name + " has length " + std::to_string(v.size()) + ", expected " +
              std::to_string(len));
  require(v.allFinite(), ErrorKind::kInvalidData, name + " has non-finite entries");
}

inline void check_matrix(const Matrix& a, Index rows, Index cols, const std::string& name) {
  require(a.rows() == rows && a.cols() == cols, ErrorKind::kDimensionMismatch,
          name + " is " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
              ", expected " + std::to_string(rows) + "x" + std::to_string(cols));
  require(a.allFinite(), ErrorKind::kInvalidData, name + " has non-finite entries");
}

}  // namespace detail

inline void validate(const FirstOrderData& d) {
  detail::require(d.n >= 0 && d.l >= 0 && d.m >= 0 && d.p >= 0,
                  ErrorKind::kDimensionMismatch, "negative dimension");
  detail::check_vector(d.grad_f, d.n, "grad_f");
  detail::check_vector(d.g_vals, d.l, "g_vals");
  detail::check_matrix(d.grad_g, d.l, d.n, "grad_g");
  detail::check_vector(d.h_vals, d.m, "h_vals");
  detail::check_matrix(d.grad_h, d.m, d.n, "grad_h");
  detail::check_vector(d.G_vals, d.p, "G_vals");
  detail::check_matrix(d.grad_G, d.p, d.n, "grad_G");
  detail::check_vector(d.H_vals, d.p, "H_vals");
  detail::check_matrix(d.grad_H, d.p, d.n, "grad_H");
}

inline void validate(const AffineInstance& inst) {
  const Index n = inst.n();
  detail::check_vector(inst.c, n, "c");
  detail::check_matrix(inst.Q, n, n, "Q");
  detail::require((inst.Q - inst.Q.transpose()).cwiseAbs().maxCoeff() <= 1e-12 || n == 0,
                  ErrorKind::kInvalidData, "Q is not symmetric");
  detail::check_matrix(inst.A_g, inst.l(), n, "A_g");
  detail::check_vector(inst.b_g, inst.l(), "b_g");
  detail::check_matrix(inst.A_h, inst.m(), n, "A_h");
  detail::check_vector(inst.b_h, inst.m(), "b_h");
  detail::check_matrix(inst.A_G, inst.p(), n, "A_G");
  detail::check_vector(inst.b_G, inst.p(), "b_G");
  detail::check_matrix(inst.A_H, inst.p(), n, "A_H");
  detail::check_vector(inst.b_H, inst.p(), "b_H");
}

inline void validate(const Tolerances& tol) {
  detail::require(tol.active_tol >= 0 && tol.feas_tol >= 0 && tol.solver_tol >= 0 &&
                      tol.cert_tol >= 0,
                  ErrorKind::kInvalidData, "tolerances must be nonnegative");
}

// An empty AffineInstance skeleton with n variables and the given constraint
// counts; everything is zero.
inline AffineInstance make_affine(Index n, Index l, Index m, Index p) {
  AffineInstance inst;
  inst.Q = Matrix::Zero(n, n);
  inst.c = Vector::Zero(n);
  inst.A_g = Matrix::Zero(l, n);
  inst.b_g = Vector::Zero(l);
  inst.A_h = Matrix::Zero(m, n);
  inst.b_h = Vector::Zero(m);
  inst.A_G = Matrix::Zero(p, n);
  inst.b_G = Vector::Zero(p);
  inst.A_H = Matrix::Zero(p, n);
  inst.b_H = Vector::Zero(p);
  return inst;
}

inline FirstOrderData evaluate_affine(const AffineInstance& inst, const Vector& x) {
  validate(inst);
  detail::check_vector(x, inst.n(), "x");
  FirstOrderData d;
  d.n = inst.n();
  d.l = inst.l();
  d.m = inst.m();
  d.p = inst.p();
  d.grad_f = inst.Q * x + inst.c;
  d.g_vals = inst.A_g * x + inst.b_g;
  d.grad_g = inst.A_g;
  d.h_vals = inst.A_h * x + inst.b_h;
  d.grad_h = inst.A_h;
  d.G_vals = inst.A_G * x + inst.b_G;
  d.grad_G = inst.A_G;
  d.H_vals = inst.A_H * x + inst.b_H;
  d.grad_H = inst.A_H;
  return d;
}

inline FeasibilityReport check_feasibility(const FirstOrderData& d, const Tolerances& tol) {
  validate(d);
  FeasibilityReport rep;
  auto record = [&rep](std::string name, double amount) {
    if (!(amount > 0.0)) return;
    if (amount > rep.max_violation) {
      rep.max_violation = amount;
      rep.worst = name;
    }
    rep.violations.push_back({std::move(name), amount});
  };
  for (Index i = 0; i < d.l; ++i) record("g_" + std::to_string(i + 1), std::max(d.g_vals(i), 0.0));
  for (Index i = 0; i < d.m; ++i) record("h_" + std::to_string(i + 1), std::abs(d.h_vals(i)));
  for (Index i = 0; i < d.p; ++i) record("G_" + std::to_string(i + 1), std::max(-d.G_vals(i), 0.0));
  for (Index i = 0; i < d.p; ++i) record("H_" + std::to_string(i + 1), std::max(-d.H_vals(i), 0.0));
  for (Index i = 0; i < d.p; ++i) {
    const double c = std::min(std::max(d.G_vals(i), 0.0), std::max(d.H_vals(i), 0.0));
    rep.complementarity_violation = std::max(rep.complementarity_violation, c);
    record("comp_" + std::to_string(i + 1), c);
  }
  rep.feasible = rep.max_violation <= tol.feas_tol;
  return rep;
}

// Thresholds are absolute and inclusive: a value at exactly active_tol counts
// as zero. Data is expected to be pre-scaled.
inline IndexSets classify_indices(const FirstOrderData& d, const Tolerances& tol) {
  validate(tol);
  const FeasibilityReport rep = check_feasibility(d, tol);
  if (!rep.feasible) {
    throw Error(ErrorKind::kInfeasiblePoint,
                "worst violation " + rep.worst + " = " + std::to_string(rep.max_violation));
  }
  IndexSets s;
  s.g_is_active.assign(static_cast<std::size_t>(d.l), false);
  for (Index i = 0; i < d.l; ++i) {
    if (std::abs(d.g_vals(i)) <= tol.active_tol) {
      s.active_g.push_back(i);
      s.g_is_active[static_cast<std::size_t>(i)] = true;
    }
  }
  s.pair.resize(static_cast<std::size_t>(d.p));
  for (Index i = 0; i < d.p; ++i) {
    const bool g_zero = d.G_vals(i) <= tol.active_tol;
    const bool h_zero = d.H_vals(i) <= tol.active_tol;
    PairState st;
    if (g_zero && h_zero) {
      st = PairState::kZeroZero;
    } else if (h_zero) {
      st = PairState::kPlusZero;
    } else if (g_zero) {
      st = PairState::kZeroPlus;
    } else {
      // Both above active_tol but within feas_tol of complementarity; the
      // smaller one is the zero side.
      st = d.G_vals(i) >= d.H_vals(i) ? PairState::kPlusZero : PairState::kZeroPlus;
    }
    s.pair[static_cast<std::size_t>(i)] = st;
    switch (st) {
      case PairState::kZeroZero: s.zero_zero.push_back(i); break;
      case PairState::kPlusZero: s.plus_zero.push_back(i); break;
      case PairState::kZeroPlus: s.zero_plus.push_back(i); break;
    }
  }
  return s;
}

}  // namespace mstat
