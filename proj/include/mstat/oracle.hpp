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

// Brute-force cross-checks for the certificate pipeline. None of these share
// the branch/combination route: the M-multiplier oracle enumerates the three
// ways each biactive pair can satisfy the M condition and solves one LP per
// pattern, the grid oracles scan the weight simplex, and the tangent oracle
// analyses rays through x̄ on the piecewise-affine feasible set.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mstat/cones.hpp"
#include "mstat/min_norm.hpp"
#include "mstat/stationarity.hpp"

namespace mstat {

enum class Pattern : std::uint8_t { kBothPositive, kMuZero, kNuZero };

inline const char* to_string(Pattern p) {
  switch (p) {
    case Pattern::kBothPositive: return "BothPositive";
    case Pattern::kMuZero: return "MuZero";
    case Pattern::kNuZero: return "NuZero";
  }
  return "?";
}

// One entry per biactive index, in the order of IndexSets::zero_zero.
using PatternAssignment = std::vector<Pattern>;

struct OracleResult {
  bool exists = false;
  std::optional<MultiplierVector> witness;
  PatternAssignment pattern;  // the first feasible pattern
  double margin = 0.0;        // min(μ_i, ν_i) over BothPositive indices
  std::size_t lp_count = 0;
};

inline constexpr std::size_t kPatternCap = 8;

// Enumerates all 3^|I00| sign patterns in lexicographic order. BothPositive
// indices get an auxiliary t with μ_i, ν_i >= t, t in [epsilon, 1], and the
// LP maximizes t, so the witness sits as deep inside the strict region as the
// system allows.
inline OracleResult oracle_m_exists(const FirstOrderData& d, const IndexSets& s, double epsilon,
                                    const LpOptions& opt = {}) {
  const std::vector<Index>& bi = s.biactive();
  if (bi.size() > kPatternCap) {
    throw Error(ErrorKind::kPatternBudgetExceeded,
                std::to_string(bi.size()) + " biactive indices exceed the pattern cap of " +
                    std::to_string(kPatternCap));
  }
  std::size_t total = 1;
  for (std::size_t k = 0; k < bi.size(); ++k) total *= 3;

  OracleResult res;
  PatternAssignment pat(bi.size(), Pattern::kBothPositive);
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t rest = code;
    for (std::size_t k = bi.size(); k-- > 0;) {
      pat[k] = static_cast<Pattern>(rest % 3);
      rest /= 3;
    }
    detail::MultiplierProgram prog(d, s, -d.grad_f);
    LinearProgram& lp = prog.lp();
    const bool any_positive = std::find(pat.begin(), pat.end(), Pattern::kBothPositive) != pat.end();
    Index t_col = -1;
    if (any_positive) {
      t_col = lp.dim();
      lp.objective.conservativeResize(t_col + 1);
      lp.objective.setZero();
      lp.objective(t_col) = -1.0;
      lp.lower.conservativeResize(t_col + 1);
      lp.upper.conservativeResize(t_col + 1);
      lp.lower(t_col) = epsilon;
      lp.upper(t_col) = std::max(1.0, epsilon);
      lp.eq_matrix.conservativeResize(Eigen::NoChange, t_col + 1);
      lp.eq_matrix.col(t_col).setZero();
      lp.ineq_matrix.conservativeResize(Eigen::NoChange, t_col + 1);
      lp.ineq_matrix.col(t_col).setZero();
    }
    for (std::size_t k = 0; k < bi.size(); ++k) {
      const Index mu = prog.mu_col(bi[k]);
      const Index nu = prog.nu_col(bi[k]);
      switch (pat[k]) {
        case Pattern::kMuZero: lp.lower(mu) = lp.upper(mu) = 0.0; break;
        case Pattern::kNuZero: lp.lower(nu) = lp.upper(nu) = 0.0; break;
        case Pattern::kBothPositive:
          for (Index c : {mu, nu}) {
            Vector row = Vector::Zero(lp.dim());
            row(c) = -1.0;
            row(t_col) = 1.0;
            lp.add_ineq(row, 0.0);
          }
          break;
      }
    }
    const LpOutcome out = lp_solve(lp, opt);
    ++res.lp_count;
    if (!out.optimal()) continue;
    res.exists = true;
    res.pattern = pat;
    res.witness = prog.unpack(out.solution.head(prog.columns()));
    res.margin = any_positive ? out.solution(t_col) : 0.0;
    // Pinned coordinates are exact zeros.
    for (std::size_t k = 0; k < bi.size(); ++k) {
      if (pat[k] == Pattern::kMuZero) res.witness->mu(bi[k]) = 0.0;
      if (pat[k] == Pattern::kNuZero) res.witness->nu(bi[k]) = 0.0;
    }
    return res;
  }
  return res;
}

inline OracleResult oracle_m_exists(const FirstOrderData& d, const IndexSets& s, const Tolerances& tol) {
  return oracle_m_exists(d, s, tol.cert_tol, LpOptions{tol.solver_tol, 1e-10});
}

// S-multiplier existence: μ_i, ν_i >= 0 on the biactive set.
inline std::optional<MultiplierVector> oracle_s_exists(const FirstOrderData& d, const IndexSets& s,
                                                       const LpOptions& opt = {}) {
  detail::MultiplierProgram prog(d, s, -d.grad_f);
  for (Index i : s.biactive()) {
    prog.lp().lower(prog.mu_col(i)) = 0.0;
    prog.lp().lower(prog.nu_col(i)) = 0.0;
  }
  const LpOutcome out = lp_solve(prog.lp(), opt);
  if (!out.optimal()) return std::nullopt;
  return prog.unpack(out.solution);
}

namespace detail {

// Calls visit(weights) for every point of the simplex grid with the given
// number of divisions, in lexicographic order of the integer numerators.
template <class Visit>
void for_each_simplex_grid_point(std::size_t k, int divisions, Visit&& visit) {
  std::vector<int> num(k, 0);
  Vector w(static_cast<Index>(k));
  auto rec = [&](auto&& self, std::size_t pos, int left) -> void {
    if (pos + 1 == k) {
      num[pos] = left;
      for (std::size_t j = 0; j < k; ++j) w(static_cast<Index>(j)) = static_cast<double>(num[j]) / divisions;
      visit(w);
      return;
    }
    for (int a = 0; a <= left; ++a) {
      num[pos] = a;
      self(self, pos + 1, left - a);
    }
  };
  if (k > 0) rec(rec, 0, divisions);
}

}  // namespace detail

// Scans convex combinations of at most four (μ, ν) points on a simplex grid
// and returns the smallest-norm combination satisfying the M condition at
// every biactive index, or nullopt if the grid contains none.
inline std::optional<Vector> oracle_combiner_grid(const std::vector<Vector>& points,
                                                  const std::vector<Index>& biactive, double grid_step,
                                                  double tol = 1e-7) {
  detail::require(!points.empty() && points.size() <= 4, ErrorKind::kInvalidData,
                  "grid oracle supports one to four points");
  detail::require(grid_step > 0 && grid_step <= 1, ErrorKind::kInvalidData, "bad grid step");
  const Index dim = points.front().size();
  detail::require(dim % 2 == 0, ErrorKind::kDimensionMismatch, "points must be (mu, nu) stacks");
  const Index p = dim / 2;
  Matrix v(dim, static_cast<Index>(points.size()));
  for (std::size_t k = 0; k < points.size(); ++k) {
    detail::check_vector(points[k], dim, "point");
    v.col(static_cast<Index>(k)) = points[k];
  }
  std::optional<Vector> best;
  double best_norm = kInf;
  const int divisions = static_cast<int>(std::lround(1.0 / grid_step));
  Vector q(dim);
  detail::for_each_simplex_grid_point(points.size(), divisions, [&](const Vector& w) {
    q.noalias() = v * w;
    for (Index i : biactive) {
      if (!m_condition_holds(q(i), q(p + i), tol)) return;
    }
    const double nrm = q.squaredNorm();
    if (nrm < best_norm) {
      best_norm = nrm;
      best = q;
    }
  });
  return best;
}

// Smallest squared norm over the simplex grid, restricted by the sign
// constraints; nullopt when no grid point is feasible.
inline std::optional<double> oracle_min_norm_grid(const MinNormProblem& prob, double grid_step) {
  detail::require(!prob.vertices.empty() && prob.vertices.size() <= 4, ErrorKind::kInvalidData,
                  "grid oracle supports one to four vertices");
  const Index dim = prob.vertices.front().size();
  Matrix v(dim, static_cast<Index>(prob.vertices.size()));
  for (std::size_t k = 0; k < prob.vertices.size(); ++k) v.col(static_cast<Index>(k)) = prob.vertices[k];
  std::optional<double> best;
  const int divisions = static_cast<int>(std::lround(1.0 / grid_step));
  Vector q(dim);
  detail::for_each_simplex_grid_point(prob.vertices.size(), divisions, [&](const Vector& w) {
    q.noalias() = v * w;
    for (const SignConstraint& sc : prob.sign_constraints) {
      if (q(sc.coordinate) < sc.lower) return;
    }
    if (!best || q.squaredNorm() < *best) best = q.squaredNorm();
  });
  return best;
}

// Tangency of d at x̄ for affine constraints. Near x̄ the feasible set is the
// union of the polyhedral pieces obtained by choosing, for each pair, G_i = 0
// (H_i >= 0) or H_i = 0 (G_i >= 0); only pieces containing x̄ matter, so
// pairs with one strictly positive side have their choice forced. For a
// polyhedron the tangent cone at x̄ is the set of feasible ray directions,
// read off from the constraints active at x̄. A piece is chosen independently
// per pair, so d is tangent iff every pair admits some choice.
inline bool affine_ray_tangent(const AffineInstance& inst, const FirstOrderData& at_x, const Vector& d,
                               const Tolerances& tol) {
  for (Index i = 0; i < inst.l(); ++i) {
    if (at_x.g_vals(i) >= -tol.active_tol && inst.A_g.row(i).dot(d) > tol.cert_tol) return false;
  }
  for (Index i = 0; i < inst.m(); ++i) {
    if (std::abs(inst.A_h.row(i).dot(d)) > tol.cert_tol) return false;
  }
  for (Index i = 0; i < inst.p(); ++i) {
    const double sg = inst.A_G.row(i).dot(d);
    const double sh = inst.A_H.row(i).dot(d);
    const bool g_zero = at_x.G_vals(i) <= tol.active_tol;
    const bool h_zero = at_x.H_vals(i) <= tol.active_tol;
    // Piece "G_i = 0": stay on G_i = 0, keep H_i >= 0 if it is active.
    const bool g_piece = g_zero && std::abs(sg) <= tol.cert_tol && (!h_zero || sh >= -tol.cert_tol);
    const bool h_piece = h_zero && std::abs(sh) <= tol.cert_tol && (!g_zero || sg >= -tol.cert_tol);
    if (!g_piece && !h_piece) return false;
  }
  return true;
}

struct TangentSampleReport {
  int samples = 0;
  int tangent = 0;
  int linearized = 0;
  int mismatches = 0;             // tangent xor linearized
  int sequence_failures = 0;      // tangent rays whose points x̄ + t_k d were infeasible
  std::vector<Vector> mismatch_directions;  // first few offenders
};

// Samples directions at x̄ and compares the affine ray analysis with
// membership in the complementarity-linearized cone. Half the directions are
// uniform on the sphere; the other half are drawn from random polyhedral
// pieces through x̄ (so they are tangent), some with a small perturbation.
// Every direction judged tangent is also checked on the sequence
// x_k = x̄ + t_k d, t_k = t_0 2^-k.
inline TangentSampleReport oracle_tangent_sample(const AffineInstance& inst, const Vector& x_bar,
                                                 int directions, std::uint64_t seed,
                                                 const Tolerances& tol = {}) {
  const FirstOrderData at_x = evaluate_affine(inst, x_bar);
  const IndexSets sets = classify_indices(at_x, tol);
  const LinearizedCone cone(at_x, sets);
  const Index n = inst.n();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<int> coin(0, 1);

  // Ray cone of one random piece through x̄ as an LP over d in the unit box.
  auto piece_direction = [&]() -> Vector {
    LinearProgram lp = LinearProgram::free_variables(n);
    for (Index i = 0; i < inst.l(); ++i) {
      if (at_x.g_vals(i) >= -tol.active_tol) lp.add_ineq(inst.A_g.row(i).transpose(), 0.0);
    }
    for (Index i = 0; i < inst.m(); ++i) lp.add_eq(inst.A_h.row(i).transpose(), 0.0);
    for (Index i = 0; i < inst.p(); ++i) {
      const bool g_zero = at_x.G_vals(i) <= tol.active_tol;
      const bool h_zero = at_x.H_vals(i) <= tol.active_tol;
      const bool on_g = g_zero && (!h_zero || coin(rng) == 0);
      if (on_g) {
        lp.add_eq(inst.A_G.row(i).transpose(), 0.0);
        if (h_zero) lp.add_ineq(-inst.A_H.row(i).transpose(), 0.0);
      } else {
        lp.add_eq(inst.A_H.row(i).transpose(), 0.0);
        if (g_zero) lp.add_ineq(-inst.A_G.row(i).transpose(), 0.0);
      }
    }
    lp.lower.setConstant(-1.0);
    lp.upper.setConstant(1.0);
    // A random objective can make the origin optimal; retry a few times.
    for (int attempt = 0; attempt < 8; ++attempt) {
      for (Index j = 0; j < n; ++j) lp.objective(j) = normal(rng);
      const LpOutcome o = lp_solve(lp, LpOptions{tol.solver_tol, 1e-10});
      if (o.optimal() && o.solution.norm() > 1e-6) return o.solution;
    }
    Vector d(n);
    for (Index j = 0; j < n; ++j) d(j) = normal(rng);
    return d;
  };

  // Largest step keeping the inactive constraints satisfied.
  auto step_limit = [&](const Vector& d) {
    double t = 1.0;
    auto limit = [&](double value, double slope) {
      if (slope < 0 && value > 0) t = std::min(t, value / -slope);
    };
    for (Index i = 0; i < inst.l(); ++i) limit(-at_x.g_vals(i), -inst.A_g.row(i).dot(d));
    for (Index i = 0; i < inst.p(); ++i) {
      limit(at_x.G_vals(i), inst.A_G.row(i).dot(d));
      limit(at_x.H_vals(i), inst.A_H.row(i).dot(d));
    }
    return t;
  };

  TangentSampleReport rep;
  for (int k = 0; k < directions; ++k) {
    Vector d(n);
    if (k % 2 == 0) {
      for (Index j = 0; j < n; ++j) d(j) = normal(rng);
    } else {
      d = piece_direction();
      if (k % 4 == 3) {
        for (Index j = 0; j < n; ++j) d(j) += 5e-2 * normal(rng);
      }
    }
    const double nrm = d.norm();
    if (nrm == 0.0) continue;
    d /= nrm;
    ++rep.samples;
    const bool tangent = affine_ray_tangent(inst, at_x, d, tol);
    const bool lin = tmpcclin_contains(cone, d, tol.cert_tol);
    rep.tangent += tangent ? 1 : 0;
    rep.linearized += lin ? 1 : 0;
    if (tangent != lin) {
      ++rep.mismatches;
      if (rep.mismatch_directions.size() < 5) rep.mismatch_directions.push_back(d);
    }
    if (tangent) {
      const double t0 = 0.5 * step_limit(d);
      Tolerances seq_tol = tol;
      for (int j = 0; j < 5; ++j) {
        const double t = std::ldexp(t0, -j);
        seq_tol.feas_tol = tol.feas_tol + t * 10.0 * tol.cert_tol;
        if (!check_feasibility(evaluate_affine(inst, x_bar + t * d), seq_tol).feasible) {
          ++rep.sequence_failures;
          break;
        }
      }
    }
  }
  return rep;
}

}  // namespace mstat
