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

// Linearized tangent cones at x̄ and the polars of their branch pieces.
//
// The complementarity-linearized cone is
//
//   ∇g_iᵀd <= 0 (i active),  ∇h_iᵀd = 0,
//   ∇G_iᵀd = 0 (0+),  ∇H_iᵀd = 0 (+0),
//   ∇G_iᵀd >= 0, ∇H_iᵀd >= 0, (∇G_iᵀd)(∇H_iᵀd) = 0 (00).
//
// Fixing a branch α replaces the product condition by ∇H_iᵀd = 0 (α_i = 1) or
// ∇G_iᵀd = 0 (α_i = 2), which makes the piece a convex polyhedral cone whose
// polar is
//
//   Σ λ_i ∇g_i + Σ η_i ∇h_i - Σ μ_i ∇G_i - Σ ν_i ∇H_i
//
// with λ >= 0 on active g, μ supported on 0+ ∪ 00, ν on +0 ∪ 00, and μ_i >= 0
// (α_i = 1) or ν_i >= 0 (α_i = 2) on 00.

#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "mstat/lp.hpp"
#include "mstat/multipliers.hpp"

namespace mstat {

class LinearizedCone {
 public:
  LinearizedCone(FirstOrderData data, IndexSets sets) : data_(std::move(data)), sets_(std::move(sets)) {
    validate(data_);
    detail::require(static_cast<Index>(sets_.g_is_active.size()) == data_.l &&
                        static_cast<Index>(sets_.pair.size()) == data_.p,
                    ErrorKind::kDimensionMismatch, "index sets do not match the data");
  }

  const FirstOrderData& data() const { return data_; }
  const IndexSets& sets() const { return sets_; }

 private:
  FirstOrderData data_;
  IndexSets sets_;
};

namespace detail {

inline void check_direction(const LinearizedCone& cone, const Vector& d) {
  require(d.size() == cone.data().n, ErrorKind::kDimensionMismatch,
          "direction has length " + std::to_string(d.size()) + ", expected " +
              std::to_string(cone.data().n));
}

inline void check_branch(const LinearizedCone& cone, const BranchAssignment& alpha) {
  require(alpha.size() == cone.data().p, ErrorKind::kDimensionMismatch,
          "branch assignment has length " + std::to_string(alpha.size()) + ", expected " +
              std::to_string(cone.data().p));
}

// Rows shared by the full linearized cone and every branch piece.
inline bool common_rows_hold(const LinearizedCone& cone, const Vector& d, double tol) {
  const FirstOrderData& x = cone.data();
  const IndexSets& s = cone.sets();
  for (Index i : s.active_g) {
    if (x.grad_g.row(i).dot(d) > tol) return false;
  }
  for (Index i = 0; i < x.m; ++i) {
    if (std::abs(x.grad_h.row(i).dot(d)) > tol) return false;
  }
  for (Index i : s.zero_plus) {
    if (std::abs(x.grad_G.row(i).dot(d)) > tol) return false;
  }
  for (Index i : s.plus_zero) {
    if (std::abs(x.grad_H.row(i).dot(d)) > tol) return false;
  }
  return true;
}

}  // namespace detail

// The product condition is checked as |(∇G_iᵀd)(∇H_iᵀd)| <= tol on top of the
// two sign checks, so it composes two tolerances.
inline bool tmpcclin_contains(const LinearizedCone& cone, const Vector& d, double tol) {
  detail::check_direction(cone, d);
  if (!detail::common_rows_hold(cone, d, tol)) return false;
  const FirstOrderData& x = cone.data();
  for (Index i : cone.sets().zero_zero) {
    const double gd = x.grad_G.row(i).dot(d);
    const double hd = x.grad_H.row(i).dot(d);
    if (gd < -tol || hd < -tol || std::abs(gd * hd) > tol) return false;
  }
  return true;
}

inline bool branch_cone_contains(const LinearizedCone& cone, const BranchAssignment& alpha,
                                 const Vector& d, double tol) {
  detail::check_direction(cone, d);
  detail::check_branch(cone, alpha);
  if (!detail::common_rows_hold(cone, d, tol)) return false;
  const FirstOrderData& x = cone.data();
  for (Index i : cone.sets().zero_zero) {
    const double gd = x.grad_G.row(i).dot(d);
    const double hd = x.grad_H.row(i).dot(d);
    if (gd < -tol || hd < -tol) return false;
    const double pinned = alpha[i] == Branch::kOne ? hd : gd;
    if (std::abs(pinned) > tol) return false;
  }
  return true;
}

// The branch cone as an LP over free d: eq rows A_eq d = 0, ineq rows A_in d <= 0.
inline LinearProgram branch_cone_program(const LinearizedCone& cone, const BranchAssignment& alpha) {
  detail::check_branch(cone, alpha);
  const FirstOrderData& x = cone.data();
  const IndexSets& s = cone.sets();
  LinearProgram lp = LinearProgram::free_variables(x.n);
  for (Index i : s.active_g) lp.add_ineq(x.grad_g.row(i).transpose(), 0.0);
  for (Index i = 0; i < x.m; ++i) lp.add_eq(x.grad_h.row(i).transpose(), 0.0);
  for (Index i : s.zero_plus) lp.add_eq(x.grad_G.row(i).transpose(), 0.0);
  for (Index i : s.plus_zero) lp.add_eq(x.grad_H.row(i).transpose(), 0.0);
  for (Index i : s.zero_zero) {
    const Vector gi = x.grad_G.row(i).transpose();
    const Vector hi = x.grad_H.row(i).transpose();
    if (alpha[i] == Branch::kOne) {
      lp.add_eq(hi, 0.0);
      lp.add_ineq(-gi, 0.0);
    } else {
      lp.add_eq(gi, 0.0);
      lp.add_ineq(-hi, 0.0);
    }
  }
  return lp;
}

namespace detail {

// Representation LP for Σ λ_i ∇g_i + Σ η_i ∇h_i - Σ μ_i ∇G_i - Σ ν_i ∇H_i = rhs
// over the multipliers that may be nonzero: λ on active g (>= 0), η (free),
// μ on 0+ ∪ 00 and ν on +0 ∪ 00 (free; callers tighten biactive bounds).
class MultiplierProgram {
 public:
  enum class Block { kLambda, kEta, kMu, kNu };
  struct Column {
    Block block;
    Index index;
  };

  MultiplierProgram(const FirstOrderData& x, const IndexSets& s, const Vector& rhs) : x_(x) {
    for (Index i : s.active_g) cols_.push_back({Block::kLambda, i});
    for (Index i = 0; i < x.m; ++i) cols_.push_back({Block::kEta, i});
    mu_col_.assign(static_cast<std::size_t>(x.p), -1);
    nu_col_.assign(static_cast<std::size_t>(x.p), -1);
    for (Index i = 0; i < x.p; ++i) {
      if (s.state(i) == PairState::kPlusZero) continue;
      mu_col_[static_cast<std::size_t>(i)] = static_cast<Index>(cols_.size());
      cols_.push_back({Block::kMu, i});
    }
    for (Index i = 0; i < x.p; ++i) {
      if (s.state(i) == PairState::kZeroPlus) continue;
      nu_col_[static_cast<std::size_t>(i)] = static_cast<Index>(cols_.size());
      cols_.push_back({Block::kNu, i});
    }
    const Index nc = static_cast<Index>(cols_.size());
    lp_ = LinearProgram::free_variables(nc);
    lp_.eq_matrix.resize(x.n, nc);
    lp_.eq_rhs = rhs;
    for (Index c = 0; c < nc; ++c) {
      const Column& col = cols_[static_cast<std::size_t>(c)];
      switch (col.block) {
        case Block::kLambda:
          lp_.eq_matrix.col(c) = x.grad_g.row(col.index).transpose();
          lp_.lower(c) = 0.0;
          break;
        case Block::kEta: lp_.eq_matrix.col(c) = x.grad_h.row(col.index).transpose(); break;
        case Block::kMu: lp_.eq_matrix.col(c) = -x.grad_G.row(col.index).transpose(); break;
        case Block::kNu: lp_.eq_matrix.col(c) = -x.grad_H.row(col.index).transpose(); break;
      }
    }
  }

  LinearProgram& lp() { return lp_; }
  Index columns() const { return static_cast<Index>(cols_.size()); }
  Index mu_col(Index i) const { return mu_col_[static_cast<std::size_t>(i)]; }
  Index nu_col(Index i) const { return nu_col_[static_cast<std::size_t>(i)]; }

  MultiplierVector unpack(const Vector& sol) const {
    MultiplierVector mult = MultiplierVector::zeros(x_.l, x_.m, x_.p);
    for (std::size_t c = 0; c < cols_.size(); ++c) {
      const double v = sol(static_cast<Index>(c));
      switch (cols_[c].block) {
        case Block::kLambda: mult.lambda(cols_[c].index) = v; break;
        case Block::kEta: mult.eta(cols_[c].index) = v; break;
        case Block::kMu: mult.mu(cols_[c].index) = v; break;
        case Block::kNu: mult.nu(cols_[c].index) = v; break;
      }
    }
    return mult;
  }

 private:
  const FirstOrderData& x_;
  std::vector<Column> cols_;
  std::vector<Index> mu_col_;
  std::vector<Index> nu_col_;
  LinearProgram lp_;
};

}  // namespace detail

// Expresses w as an element of the polar of the α-branch cone. Returns
// nullopt when the representation LP is infeasible, which by Farkas' lemma
// means w is not in that polar. The returned multipliers are the LP's basic
// solution, with zeros off the supports.
inline std::optional<MultiplierVector> polar_branch_membership(const LinearizedCone& cone,
                                                                const BranchAssignment& alpha,
                                                                const Vector& w,
                                                                const LpOptions& opt = {}) {
  detail::check_direction(cone, w);
  detail::check_branch(cone, alpha);
  detail::MultiplierProgram prog(cone.data(), cone.sets(), w);
  for (Index i : cone.sets().zero_zero) {
    const Index c = alpha[i] == Branch::kOne ? prog.mu_col(i) : prog.nu_col(i);
    prog.lp().lower(c) = 0.0;
  }
  const LpOutcome out = lp_solve(prog.lp(), opt);
  if (!out.optimal()) return std::nullopt;
  return prog.unpack(out.solution);
}

// Farkas witness for a NotInPolar verdict: a direction d in the α-branch cone,
// normalized to the unit box, maximizing wᵀd. Returns nullopt when the best
// value does not exceed tol (w is then in the polar).
inline std::optional<Vector> separating_direction(const LinearizedCone& cone,
                                                  const BranchAssignment& alpha, const Vector& w,
                                                  double tol, const LpOptions& opt = {}) {
  detail::check_direction(cone, w);
  LinearProgram lp = branch_cone_program(cone, alpha);
  lp.objective = -w;
  lp.lower.setConstant(-1.0);
  lp.upper.setConstant(1.0);
  const LpOutcome out = lp_solve(lp, opt);
  if (!out.optimal() || -out.objective_value <= tol) return std::nullopt;
  return out.solution;
}

// Directions from the α-branch cone: box-normalized LP vertices for random
// objectives, mixed with random nonnegative combinations of earlier samples.
template <class Urbg>
std::vector<Vector> sample_branch_cone(const LinearizedCone& cone, const BranchAssignment& alpha,
                                       int count, Urbg& rng, const LpOptions& opt = {}) {
  LinearProgram lp = branch_cone_program(cone, alpha);
  lp.lower.setConstant(-1.0);
  lp.upper.setConstant(1.0);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit;
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(count));
  const int vertices = std::max(1, std::min(count, 32));
  for (int k = 0; k < count; ++k) {
    if (k < vertices) {
      for (Index j = 0; j < lp.dim(); ++j) lp.objective(j) = normal(rng);
      const LpOutcome o = lp_solve(lp, opt);
      out.push_back(o.optimal() ? o.solution : Vector::Zero(lp.dim()));
    } else {
      const std::size_t a = static_cast<std::size_t>(unit(rng) * vertices);
      const std::size_t b = static_cast<std::size_t>(unit(rng) * vertices);
      out.push_back(unit(rng) * out[std::min<std::size_t>(a, vertices - 1)] +
                    unit(rng) * out[std::min<std::size_t>(b, vertices - 1)]);
    }
  }
  return out;
}

struct TmpcclinMembership {
  bool operator()(const LinearizedCone& cone, const Vector& d, double tol) const {
    return tmpcclin_contains(cone, d, tol);
  }
};

// Samples the α-branch cone and checks that every sample is accepted by the
// membership predicate of the full linearized cone. Returns false on the first
// counterexample. Tests swap in mutated predicates to see the check fail.
template <class Membership = TmpcclinMembership>
bool branch_cone_inclusion_check(const LinearizedCone& cone, const BranchAssignment& alpha,
                                 int samples, std::uint64_t seed, Membership contains = {},
                                 double tol = 1e-7) {
  std::mt19937_64 rng(seed);
  for (const Vector& d : sample_branch_cone(cone, alpha, samples, rng)) {
    if (!branch_cone_contains(cone, alpha, d, tol)) continue;
    if (!contains(cone, d, tol)) return false;
  }
  return true;
}

}  // namespace mstat
