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

// Stationarity systems and the M-stationarity certificate.
//
// A multiplier (λ, η, μ, ν) is checked against
//
//   ∇f + Σ λ_i ∇g_i + Σ η_i ∇h_i - Σ (μ_i ∇G_i + ν_i ∇H_i) = 0
//   λ_i >= 0 on active g,  λ_i = 0 on inactive g,
//   μ_i = 0 on +0,  ν_i = 0 on 0+,
//
// plus a sign pattern on the biactive pairs that decides the class:
//
//   S:  μ_i >= 0 and ν_i >= 0
//   M:  (μ_i > 0 and ν_i > 0) or μ_i ν_i = 0
//   A:  μ_i >= 0 or ν_i >= 0
//
// The certificate is built per branch α: each branch gives a multiplier with
// μ_i >= 0 (α_i = 1) or ν_i >= 0 (α_i = 2) on the biactive set, by polar
// membership of -∇f. The branch multipliers are then combined convexly. For
// every α the minimum-norm point of conv{(μ^α, ν^α)} restricted to the
// α-sign region is computed, and the one of largest norm is selected; that
// point satisfies the M condition at every biactive index. λ and η are
// carried along with the same convex weights, so the linear part of the
// system is preserved.

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mstat/cones.hpp"
#include "mstat/min_norm.hpp"
#include "mstat/multipliers.hpp"

namespace mstat {

struct BiactivePair {
  Index index = 0;
  double mu = 0.0;
  double nu = 0.0;
};

struct ResidualReport {
  double gradient = 0.0;             // ‖∇f + ... ‖_∞
  double lambda_active_min = 0.0;    // min λ_i over active g (0 if none)
  double lambda_inactive_max = 0.0;  // max |λ_i| over inactive g
  double mu_plus_zero_max = 0.0;     // max |μ_i| over +0
  double nu_zero_plus_max = 0.0;     // max |ν_i| over 0+
  std::vector<BiactivePair> biactive;

  // Largest violation of the linear part of the system.
  double system_violation() const {
    return std::max({gradient, -std::min(lambda_active_min, 0.0), lambda_inactive_max,
                     mu_plus_zero_max, nu_zero_plus_max});
  }

  std::map<std::string, double> as_map() const {
    return {{"gradient", gradient},
            {"lambda_active_min", lambda_active_min},
            {"lambda_inactive_max", lambda_inactive_max},
            {"mu_plus_zero_max", mu_plus_zero_max},
            {"nu_zero_plus_max", nu_zero_plus_max}};
  }
};

inline ResidualReport check_stationarity_system(const FirstOrderData& d, const IndexSets& s,
                                                const MultiplierVector& mult) {
  validate(d);
  check_shape(mult, d);
  ResidualReport r;
  const Vector grad = d.grad_f + d.grad_g.transpose() * mult.lambda +
                      d.grad_h.transpose() * mult.eta - d.grad_G.transpose() * mult.mu -
                      d.grad_H.transpose() * mult.nu;
  r.gradient = d.n > 0 ? grad.lpNorm<Eigen::Infinity>() : 0.0;
  bool any_active = false;
  for (Index i = 0; i < d.l; ++i) {
    if (s.is_active_g(i)) {
      r.lambda_active_min = any_active ? std::min(r.lambda_active_min, mult.lambda(i)) : mult.lambda(i);
      any_active = true;
    } else {
      r.lambda_inactive_max = std::max(r.lambda_inactive_max, std::abs(mult.lambda(i)));
    }
  }
  for (Index i = 0; i < d.p; ++i) {
    switch (s.state(i)) {
      case PairState::kPlusZero:
        r.mu_plus_zero_max = std::max(r.mu_plus_zero_max, std::abs(mult.mu(i)));
        break;
      case PairState::kZeroPlus:
        r.nu_zero_plus_max = std::max(r.nu_zero_plus_max, std::abs(mult.nu(i)));
        break;
      case PairState::kZeroZero:
        r.biactive.push_back({i, mult.mu(i), mult.nu(i)});
        break;
    }
  }
  return r;
}

// Pairwise sign conditions. Strict positivity means > tol. A vanishing
// product is accepted either as |μν| <= tol or as one factor within tol of
// zero; the second form keeps S ⇒ M when one factor is tiny and the other
// large.
inline bool s_condition_holds(double mu, double nu, double tol) { return mu >= -tol && nu >= -tol; }

inline bool m_condition_holds(double mu, double nu, double tol) {
  return (mu > tol && nu > tol) || std::abs(mu * nu) <= tol || std::min(std::abs(mu), std::abs(nu)) <= tol;
}

inline bool a_condition_holds(double mu, double nu, double tol) { return mu >= -tol || nu >= -tol; }

enum class MultiplierClass { kS, kM, kA, kWOnly };

inline const char* to_string(MultiplierClass c) {
  switch (c) {
    case MultiplierClass::kS: return "S";
    case MultiplierClass::kM: return "M";
    case MultiplierClass::kA: return "A";
    case MultiplierClass::kWOnly: return "W-only";
  }
  return "?";
}

// Ranks for comparisons: S > M > A > W-only.
inline int strength(MultiplierClass c) {
  switch (c) {
    case MultiplierClass::kS: return 3;
    case MultiplierClass::kM: return 2;
    case MultiplierClass::kA: return 1;
    case MultiplierClass::kWOnly: return 0;
  }
  return 0;
}

// Strongest class whose biactive conditions hold together with those of all
// weaker classes.
inline MultiplierClass classify_multiplier(const FirstOrderData& d, const IndexSets& s,
                                           const MultiplierVector& mult, double tol) {
  const ResidualReport r = check_stationarity_system(d, s, mult);
  if (r.system_violation() > tol) {
    throw Error(ErrorKind::kSystemViolated,
                "linear stationarity system violated by " + std::to_string(r.system_violation()));
  }
  bool a = true;
  bool m = true;
  bool st = true;
  for (const BiactivePair& bp : r.biactive) {
    a = a && a_condition_holds(bp.mu, bp.nu, tol);
    m = m && m_condition_holds(bp.mu, bp.nu, tol);
    st = st && s_condition_holds(bp.mu, bp.nu, tol);
  }
  if (a && m && st) return MultiplierClass::kS;
  if (a && m) return MultiplierClass::kM;
  if (a) return MultiplierClass::kA;
  return MultiplierClass::kWOnly;
}

// Multipliers for branch α, or nullopt when -∇f is outside the polar of the
// α-branch cone (the point cannot be a regular local minimizer then).
inline std::optional<MultiplierVector> synthesize_branch_multipliers(const LinearizedCone& cone,
                                                                      const BranchAssignment& alpha,
                                                                      const LpOptions& opt = {}) {
  return polar_branch_membership(cone, alpha, -cone.data().grad_f, opt);
}

inline std::optional<MultiplierVector> synthesize_branch_multipliers(const FirstOrderData& d,
                                                                      const IndexSets& s,
                                                                      const BranchAssignment& alpha,
                                                                      const LpOptions& opt = {}) {
  return synthesize_branch_multipliers(LinearizedCone(d, s), alpha, opt);
}

struct BranchPoint {
  MultiplierVector multipliers;
  BranchAssignment alpha;
};

struct BranchMinimum {
  BranchAssignment alpha;
  double norm_sq = 0.0;  // ‖(μ, ν)‖² of the α-restricted minimum-norm point
};

struct CombineResult {
  MultiplierVector multipliers;
  Vector weights;  // over the input points, nonnegative, summing to one
  std::vector<BranchMinimum> branch_minima;  // lexicographic in α
  std::size_t selected = 0;                  // index into branch_minima
  std::size_t qp_count = 0;
};

namespace detail {

inline std::vector<Branch> restrict_to(const BranchAssignment& a, const std::vector<Index>& idx) {
  std::vector<Branch> out;
  out.reserve(idx.size());
  for (Index i : idx) out.push_back(a[i]);
  return out;
}

}  // namespace detail

// Convex combination of branch multipliers satisfying the M condition on
// every index in `biactive`. Needs one point per sign pattern on `biactive`;
// each point must lie in its own sign region within cert_tol. The sign bound
// for a branch is relaxed to the (at most cert_tol) violation of its own
// point, so the branch's own point always stays feasible.
inline CombineResult schinabeck_combine(const std::vector<BranchPoint>& points,
                                        const std::vector<Index>& biactive,
                                        const Tolerances& tol = {}) {
  detail::require(!points.empty(), ErrorKind::kInvalidData, "no branch points");
  const MultiplierVector& first = points.front().multipliers;
  const Index l = first.lambda.size();
  const Index m = first.eta.size();
  const Index p = first.mu.size();
  for (Index i : biactive) {
    detail::require(i >= 0 && i < p, ErrorKind::kDimensionMismatch, "biactive index out of range");
  }
  detail::require(biactive.size() < 31, ErrorKind::kBranchBudgetExceeded, "too many biactive indices");
  const std::size_t expected = std::size_t{1} << biactive.size();
  detail::require(points.size() == expected, ErrorKind::kInvalidData,
                  "expected " + std::to_string(expected) + " branch points, got " +
                      std::to_string(points.size()));

  // Order points lexicographically by their pattern on the biactive set.
  std::vector<std::size_t> order(points.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::vector<std::vector<Branch>> keys;
  for (const BranchPoint& bp : points) {
    detail::require(bp.alpha.size() == p && bp.multipliers.lambda.size() == l &&
                        bp.multipliers.eta.size() == m && bp.multipliers.mu.size() == p &&
                        bp.multipliers.nu.size() == p,
                    ErrorKind::kDimensionMismatch, "inconsistent branch point shapes");
    detail::require(bp.multipliers.stacked().allFinite(), ErrorKind::kInvalidData,
                    "non-finite branch multipliers");
    keys.push_back(detail::restrict_to(bp.alpha, biactive));
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
  for (std::size_t k = 1; k < order.size(); ++k) {
    detail::require(keys[order[k - 1]] != keys[order[k]], ErrorKind::kInvalidData,
                    "duplicate branch pattern " + points[order[k]].alpha.to_string());
  }

  // Distinct (μ, ν) vertices; each keeps the first input point that produced it.
  std::vector<Vector> vertices;
  std::vector<std::size_t> owner;
  std::vector<std::size_t> vertex_of(points.size());
  for (std::size_t k : order) {
    const Vector v = points[k].multipliers.complementarity_part();
    auto it = std::find(vertices.begin(), vertices.end(), v);
    if (it == vertices.end()) {
      vertex_of[k] = vertices.size();
      vertices.push_back(v);
      owner.push_back(k);
    } else {
      vertex_of[k] = static_cast<std::size_t>(it - vertices.begin());
    }
  }

  CombineResult res;
  std::vector<MinNormResult> minima;
  const MinNormOptions qp{tol.solver_tol, 1e-10};
  for (std::size_t k : order) {
    const BranchPoint& bp = points[k];
    MinNormProblem prob;
    prob.vertices = vertices;
    for (Index i : biactive) {
      const bool on_mu = bp.alpha[i] == Branch::kOne;
      const double own = on_mu ? bp.multipliers.mu(i) : bp.multipliers.nu(i);
      detail::require(own >= -tol.cert_tol, ErrorKind::kInvalidData,
                      "branch point " + bp.alpha.to_string() + " is outside its sign region");
      prob.sign_constraints.push_back({on_mu ? i : p + i, std::min(0.0, own)});
    }
    std::optional<MinNormResult> r = min_norm_point(prob, qp);
    ++res.qp_count;
    if (!r) {
      throw Error(ErrorKind::kNumericalFailure,
                  "restricted hull empty for branch " + bp.alpha.to_string());
    }
    res.branch_minima.push_back({bp.alpha, r->point.squaredNorm()});
    minima.push_back(std::move(*r));
  }

  // Largest minimum; ties keep the lexicographically smallest α.
  std::size_t best = 0;
  for (std::size_t k = 1; k < res.branch_minima.size(); ++k) {
    if (res.branch_minima[k].norm_sq > res.branch_minima[best].norm_sq) best = k;
  }
  res.selected = best;

  res.weights = Vector::Zero(static_cast<Index>(points.size()));
  const Vector& vw = minima[best].weights;
  for (std::size_t j = 0; j < vertices.size(); ++j) res.weights(static_cast<Index>(owner[j])) = vw(static_cast<Index>(j));
  res.multipliers = MultiplierVector::zeros(l, m, p);
  for (std::size_t k = 0; k < points.size(); ++k) {
    const double w = res.weights(static_cast<Index>(k));
    if (w == 0.0) continue;
    const MultiplierVector& x = points[k].multipliers;
    res.multipliers.lambda += w * x.lambda;
    res.multipliers.eta += w * x.eta;
    res.multipliers.mu += w * x.mu;
    res.multipliers.nu += w * x.nu;
  }

  for (Index i : biactive) {
    const double mu = res.multipliers.mu(i);
    const double nu = res.multipliers.nu(i);
    if (!m_condition_holds(mu, nu, tol.cert_tol)) {
      throw Error(ErrorKind::kPostconditionViolated,
                  "combined multipliers violate the M condition at index " + std::to_string(i + 1) +
                      " (mu=" + std::to_string(mu) + ", nu=" + std::to_string(nu) + ")");
    }
  }
  return res;
}

enum class VerdictKind { kM, kA, kS, kNotStationary, kBranchInfeasible, kNumericalFailure };

inline const char* to_string(VerdictKind k) {
  switch (k) {
    case VerdictKind::kM: return "M";
    case VerdictKind::kA: return "A";
    case VerdictKind::kS: return "S";
    case VerdictKind::kNotStationary: return "NotStationary";
    case VerdictKind::kBranchInfeasible: return "BranchInfeasible";
    case VerdictKind::kNumericalFailure: return "NumericalFailure";
  }
  return "?";
}

struct BranchRecord {
  BranchAssignment alpha;
  bool feasible = false;
  std::optional<MultiplierVector> multipliers;
};

struct StationarityVerdict {
  VerdictKind kind = VerdictKind::kNotStationary;
  std::optional<MultiplierVector> witness;
  std::optional<BranchAssignment> failed_branch;
  std::map<std::string, double> residuals;
  IndexSets sets;
  std::vector<BranchRecord> branches;  // lexicographic in α
  std::optional<CombineResult> combination;
  std::size_t branch_lp_count = 0;
  std::string message;

  bool certified() const { return kind == VerdictKind::kM || kind == VerdictKind::kS; }
};

struct CertifyOptions {
  Index branch_cap = 12;
};

inline StationarityVerdict certify_m_stationarity(const FirstOrderData& d, const Tolerances& tol = {},
                                                  const CertifyOptions& opt = {}) {
  StationarityVerdict v;
  v.sets = classify_indices(d, tol);
  const std::vector<Index>& biactive = v.sets.biactive();
  if (static_cast<Index>(biactive.size()) > opt.branch_cap) {
    throw Error(ErrorKind::kBranchBudgetExceeded,
                std::to_string(biactive.size()) + " biactive indices exceed the branch cap of " +
                    std::to_string(opt.branch_cap));
  }
  const LinearizedCone cone(d, v.sets);
  const LpOptions lp_opt{tol.solver_tol, 1e-10};
  try {
    for (BranchAssignment& alpha : enumerate_branches(d.p, biactive)) {
      BranchRecord rec;
      rec.multipliers = synthesize_branch_multipliers(cone, alpha, lp_opt);
      ++v.branch_lp_count;
      rec.feasible = rec.multipliers.has_value();
      rec.alpha = std::move(alpha);
      if (!rec.feasible && !v.failed_branch) v.failed_branch = rec.alpha;
      v.branches.push_back(std::move(rec));
    }
    if (v.failed_branch) {
      v.kind = VerdictKind::kBranchInfeasible;
      v.message = "-grad f is not in the polar of branch cone " + v.failed_branch->to_string();
      return v;
    }
    std::vector<BranchPoint> points;
    points.reserve(v.branches.size());
    for (const BranchRecord& rec : v.branches) points.push_back({*rec.multipliers, rec.alpha});
    v.combination = schinabeck_combine(points, biactive, tol);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kNumericalFailure && e.kind() != ErrorKind::kPostconditionViolated) throw;
    v.kind = VerdictKind::kNumericalFailure;
    v.message = e.what();
    return v;
  }

  const MultiplierVector& w = v.combination->multipliers;
  const ResidualReport r = check_stationarity_system(d, v.sets, w);
  v.residuals = r.as_map();
  if (r.system_violation() > tol.cert_tol) {
    v.kind = VerdictKind::kNumericalFailure;
    v.message = "combined multipliers violate the stationarity system by " +
                std::to_string(r.system_violation());
    return v;
  }
  v.witness = w;
  // Without biactive pairs the S signs hold vacuously and say nothing beyond
  // the KKT system, so the verdict stays M.
  const bool strong = !biactive.empty() && classify_multiplier(d, v.sets, w, tol.cert_tol) == MultiplierClass::kS;
  v.kind = strong ? VerdictKind::kS : VerdictKind::kM;
  return v;
}

}  // namespace mstat
