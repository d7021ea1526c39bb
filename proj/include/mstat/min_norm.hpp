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

// Minimum-norm point of a polytope intersected with coordinate half-spaces.
//
// Given vertices v_1..v_K and sign constraints q_c >= lower, find
//
//   min ||q||²  s.t.  q ∈ conv{v_k},  q_c >= lower_c.
//
// The problem is solved in weight space, q = V w with w in the unit simplex,
// by a primal active-set method. Bound constraints w_k = 0 in the working set
// are eliminated, so each iteration works on the free weights only. The
// equality-constrained subproblem is a least-squares problem
//
//   min_y ||q + V Z y||
//
// (Z spans the null space of the working rows), which is bounded below even
// though VᵀV is only semidefinite; the minimum-norm least-squares solution is
// used.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "mstat/lp.hpp"

namespace mstat {

struct SignConstraint {
  Index coordinate = 0;
  double lower = 0.0;  // q_coordinate >= lower
};

struct MinNormProblem {
  std::vector<Vector> vertices;
  std::vector<SignConstraint> sign_constraints;
};

struct MinNormResult {
  Vector point;
  Vector weights;  // nonnegative, sums to one, point = Σ weights_k vertices_k
};

struct MinNormOptions {
  double solver_tol = 1e-9;
  double pivot_tol = 1e-10;
};

namespace detail {

inline Matrix null_space(const Matrix& a, double threshold) {
  // a: r x k with independent rows; returns k x (k - rank) orthonormal basis.
  const Index k = a.cols();
  if (a.rows() == 0) return Matrix::Identity(k, k);
  Eigen::ColPivHouseholderQR<Matrix> qr(a.transpose());
  qr.setThreshold(threshold);
  const Index rank = qr.rank();
  const Matrix q = qr.householderQ();
  return q.rightCols(k - rank);
}

inline Index row_rank(const Matrix& a, double threshold) {
  if (a.rows() == 0) return 0;
  Eigen::ColPivHouseholderQR<Matrix> qr(a.transpose());
  qr.setThreshold(threshold);
  return qr.rank();
}

}  // namespace detail

inline std::optional<MinNormResult> min_norm_point(const MinNormProblem& prob,
                                                   const MinNormOptions& opt = {}) {
  detail::require(!prob.vertices.empty(), ErrorKind::kInvalidData,
                  "min_norm_point needs at least one vertex");
  const Index dim = prob.vertices.front().size();
  const Index nv = static_cast<Index>(prob.vertices.size());
  Matrix v(dim, nv);
  for (Index k = 0; k < nv; ++k) {
    detail::check_vector(prob.vertices[static_cast<std::size_t>(k)], dim, "vertex");
    v.col(k) = prob.vertices[static_cast<std::size_t>(k)];
  }
  const Index ns = static_cast<Index>(prob.sign_constraints.size());
  Matrix s(ns, nv);  // rows: coordinate rows of V
  Vector lo(ns);
  for (Index j = 0; j < ns; ++j) {
    const SignConstraint& sc = prob.sign_constraints[static_cast<std::size_t>(j)];
    detail::require(sc.coordinate >= 0 && sc.coordinate < dim, ErrorKind::kDimensionMismatch,
                    "sign constraint coordinate out of range");
    detail::require(std::isfinite(sc.lower), ErrorKind::kInvalidData, "non-finite sign bound");
    s.row(j) = v.row(sc.coordinate);
    lo(j) = sc.lower;
  }

  const double scale = 1.0 + (dim > 0 ? v.cwiseAbs().maxCoeff() : 0.0);
  const double mult_tol = opt.pivot_tol * scale * scale;
  const double rank_tol = 1e-12;

  // Starting point: a feasible vertex if there is one, else a phase-one LP.
  Vector w = Vector::Zero(nv);
  {
    Index start = -1;
    for (Index k = 0; k < nv && start < 0; ++k) {
      if (ns == 0 || ((s.col(k) - lo).array() >= 0.0).all()) start = k;
    }
    if (start >= 0) {
      w(start) = 1.0;
    } else {
      LpOptions lo_opt{opt.solver_tol, opt.pivot_tol};
      const LpOutcome init =
          lp_feasible(Matrix::Ones(1, nv), Vector::Ones(1), -s, -lo, Vector::Zero(nv),
                      Vector::Constant(nv, kInf), lo_opt);
      if (!init.optimal()) return std::nullopt;
      w = init.solution.cwiseMax(0.0);
      w /= w.sum();
    }
  }

  std::vector<bool> fixed(static_cast<std::size_t>(nv), false);
  std::vector<Index> working_sign;
  for (Index k = 0; k < nv; ++k) {
    if (w(k) <= 0.0) {
      w(k) = 0.0;
      fixed[static_cast<std::size_t>(k)] = true;
    }
  }

  auto free_set = [&]() {
    std::vector<Index> f;
    for (Index k = 0; k < nv; ++k) {
      if (!fixed[static_cast<std::size_t>(k)]) f.push_back(k);
    }
    return f;
  };
  auto working_rows = [&](const std::vector<Index>& f) {
    Matrix a(1 + static_cast<Index>(working_sign.size()), static_cast<Index>(f.size()));
    for (std::size_t c = 0; c < f.size(); ++c) {
      a(0, static_cast<Index>(c)) = 1.0;
      for (std::size_t r = 0; r < working_sign.size(); ++r) {
        a(static_cast<Index>(r) + 1, static_cast<Index>(c)) = s(working_sign[r], f[c]);
      }
    }
    return a;
  };

  // Active sign constraints join the working set while they stay independent.
  for (Index j = 0; j < ns; ++j) {
    if (std::abs(s.row(j).dot(w) - lo(j)) > opt.pivot_tol * scale) continue;
    working_sign.push_back(j);
    const std::vector<Index> f = free_set();
    const Matrix a = working_rows(f);
    if (detail::row_rank(a, rank_tol) < a.rows()) working_sign.pop_back();
  }

  const Index cap = 50 * (nv + nv + ns + 1);
  bool at_subspace_min = false;
  for (Index iter = 0;; ++iter) {
    if (iter > cap) {
      throw Error(ErrorKind::kNumericalFailure,
                  "active-set iteration cap " + std::to_string(cap) + " exceeded");
    }
    const std::vector<Index> f = free_set();
    const Index nf = static_cast<Index>(f.size());
    const Vector q = v * w;
    const Matrix a = working_rows(f);
    Matrix vf(dim, nf);
    for (Index c = 0; c < nf; ++c) vf.col(c) = v.col(f[static_cast<std::size_t>(c)]);

    Vector p = Vector::Zero(nv);
    bool stationary = at_subspace_min;
    if (!stationary) {
      const Matrix z = detail::null_space(a, rank_tol);
      if (z.cols() == 0) {
        stationary = true;
      } else {
        const Matrix mz = vf * z;
        const Vector reduced = mz.transpose() * q;
        if (reduced.lpNorm<Eigen::Infinity>() <= mult_tol) {
          stationary = true;
        } else {
          Eigen::CompleteOrthogonalDecomposition<Matrix> cod(mz);
          cod.setThreshold(rank_tol);
          const Vector y = cod.solve(-q);
          const Vector pf = z * y;
          for (Index c = 0; c < nf; ++c) p(f[static_cast<std::size_t>(c)]) = pf(c);
          if (p.lpNorm<Eigen::Infinity>() <= rank_tol) stationary = true;
        }
      }
    }

    if (stationary) {
      // g = Vᵀq = λ₀·1 + Σ λ_j s_j + Σ_{fixed} ν_k e_k, with λ_j, ν_k >= 0.
      const Vector g = v.transpose() * q;
      Vector gf(nf);
      for (Index c = 0; c < nf; ++c) gf(c) = g(f[static_cast<std::size_t>(c)]);
      Eigen::CompleteOrthogonalDecomposition<Matrix> cod(a.transpose());
      const Vector lambda = cod.solve(gf);

      double most_negative = -mult_tol;
      Index drop_sign = -1;
      Index drop_bound = -1;
      for (std::size_t r = 0; r < working_sign.size(); ++r) {
        if (lambda(static_cast<Index>(r) + 1) < most_negative) {
          most_negative = lambda(static_cast<Index>(r) + 1);
          drop_sign = static_cast<Index>(r);
          drop_bound = -1;
        }
      }
      for (Index k = 0; k < nv; ++k) {
        if (!fixed[static_cast<std::size_t>(k)]) continue;
        double nu = g(k) - lambda(0);
        for (std::size_t r = 0; r < working_sign.size(); ++r) {
          nu -= lambda(static_cast<Index>(r) + 1) * s(working_sign[r], k);
        }
        if (nu < most_negative) {
          most_negative = nu;
          drop_bound = k;
          drop_sign = -1;
        }
      }
      if (drop_sign < 0 && drop_bound < 0) break;
      if (drop_bound >= 0) {
        fixed[static_cast<std::size_t>(drop_bound)] = false;
      } else {
        working_sign.erase(working_sign.begin() + drop_sign);
      }
      at_subspace_min = false;
      continue;
    }

    // Ratio test against constraints outside the working set.
    double step = 1.0;
    Index block_bound = -1;
    Index block_sign = -1;
    const double pnorm = p.lpNorm<Eigen::Infinity>();
    for (Index k = 0; k < nv; ++k) {
      if (fixed[static_cast<std::size_t>(k)]) continue;
      if (p(k) < -opt.pivot_tol * pnorm) {
        const double t = std::max(0.0, w(k) / -p(k));
        if (t < step) {
          step = t;
          block_bound = k;
          block_sign = -1;
        }
      }
    }
    for (Index j = 0; j < ns; ++j) {
      if (std::find(working_sign.begin(), working_sign.end(), j) != working_sign.end()) continue;
      const double sp = s.row(j).dot(p);
      if (sp < -opt.pivot_tol * scale * pnorm) {
        const double t = std::max(0.0, (s.row(j).dot(w) - lo(j)) / -sp);
        if (t < step) {
          step = t;
          block_sign = j;
          block_bound = -1;
        }
      }
    }
    w += step * p;
    if (block_bound >= 0) {
      w(block_bound) = 0.0;
      fixed[static_cast<std::size_t>(block_bound)] = true;
      at_subspace_min = false;
    } else if (block_sign >= 0) {
      working_sign.push_back(block_sign);
      at_subspace_min = false;
    } else {
      at_subspace_min = true;
    }
    for (Index k = 0; k < nv; ++k) {
      if (fixed[static_cast<std::size_t>(k)]) w(k) = 0.0;
    }
  }

  w = w.cwiseMax(0.0);
  w /= w.sum();
  return MinNormResult{v * w, w};
}

}  // namespace mstat
