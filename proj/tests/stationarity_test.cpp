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

#include "mstat/stationarity.hpp"

#include <gtest/gtest.h>

#include "mstat/oracle.hpp"
#include "test_util.hpp"

namespace mstat {
namespace {

using testing::mat;
using testing::vec;

MultiplierVector pair_mult(double mu, double nu) {
  return {Vector(0), Vector(0), vec({mu}), vec({nu})};
}

BranchPoint pair_point(double mu, double nu, Branch b) { return {pair_mult(mu, nu), BranchAssignment{{b}}}; }

// Corner instance with ∇f chosen so that (μ, ν) solves the system exactly.
FirstOrderData corner_for(double mu, double nu) { return testing::corner_instance(mu, nu); }

TEST(CheckStationaritySystem, Examples) {
  const FirstOrderData d = testing::corner_instance(1, 1);
  const IndexSets s = classify_indices(d, {});
  const ResidualReport ok = check_stationarity_system(d, s, pair_mult(1, 1));
  EXPECT_EQ(ok.system_violation(), 0.0);
  ASSERT_EQ(ok.biactive.size(), 1u);
  EXPECT_EQ(ok.biactive[0].mu, 1.0);

  EXPECT_EQ(check_stationarity_system(d, s, pair_mult(0, 0)).gradient, 1.0);

  FirstOrderData g = FirstOrderData::zeros(1, 1, 0, 0);
  g.grad_f = vec({-1.0});
  g.grad_g = mat({{1.0}});
  const MultiplierVector neg{vec({-1.0}), Vector(0), Vector(0), Vector(0)};
  const ResidualReport r = check_stationarity_system(g, classify_indices(g, {}), neg);
  EXPECT_EQ(r.lambda_active_min, -1.0);
  EXPECT_EQ(r.gradient, 2.0);

  EXPECT_THROW(check_stationarity_system(d, s, MultiplierVector::zeros(0, 0, 2)), Error);
}

TEST(CheckStationaritySystem, SupportResiduals) {
  // g inactive, pair 1 is +0, pair 2 is 0+.
  FirstOrderData d = FirstOrderData::zeros(2, 1, 0, 2);
  d.g_vals = vec({-1.0});
  d.grad_g = mat({{1, 0}});
  d.G_vals = vec({1.0, 0.0});
  d.H_vals = vec({0.0, 2.0});
  d.grad_G = mat({{1, 0}, {0, 1}});
  d.grad_H = mat({{0, 1}, {1, 1}});
  const IndexSets s = classify_indices(d, {});
  const MultiplierVector m{vec({0.5}), Vector(0), vec({-3, 0}), vec({0, 4})};
  const ResidualReport r = check_stationarity_system(d, s, m);
  EXPECT_EQ(r.lambda_inactive_max, 0.5);
  EXPECT_EQ(r.mu_plus_zero_max, 3.0);
  EXPECT_EQ(r.nu_zero_plus_max, 4.0);
  EXPECT_TRUE(r.biactive.empty());
}

TEST(ClassifyMultiplier, Examples) {
  struct Case {
    double mu, nu;
    MultiplierClass expected;
  };
  for (const Case& c : {Case{1, 1, MultiplierClass::kS}, Case{0, -5, MultiplierClass::kM},
                        Case{0.5, -0.5, MultiplierClass::kA}, Case{-1, -1, MultiplierClass::kWOnly}}) {
    const FirstOrderData d = corner_for(c.mu, c.nu);
    EXPECT_EQ(classify_multiplier(d, classify_indices(d, {}), pair_mult(c.mu, c.nu), 1e-7), c.expected)
        << c.mu << "," << c.nu;
  }
  EXPECT_TRUE(m_condition_holds(0, -5, 1e-7));
  EXPECT_TRUE(a_condition_holds(0, -5, 1e-7));
  EXPECT_FALSE(s_condition_holds(0, -5, 1e-7));
  EXPECT_FALSE(m_condition_holds(0.5, -0.5, 1e-7));
  EXPECT_STREQ(to_string(MultiplierClass::kWOnly), "W-only");
}

TEST(ClassifyMultiplier, RejectsViolatedSystem) {
  const FirstOrderData d = testing::corner_instance(1, 1);
  try {
    classify_multiplier(d, classify_indices(d, {}), pair_mult(2, 1), 1e-7);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kSystemViolated);
  }
}

TEST(ClassifyMultiplierProperty, ClassesAreNested) {
  testing::Rng rng(29);
  std::array<int, 4> seen{};
  for (int trial = 0; trial < 5000; ++trial) {
    // Values near the tolerance boundary are the interesting ones.
    auto draw = [&] {
      switch (testing::uniform_int(rng, 0, 3)) {
        case 0: return 0.0;
        case 1: return testing::uniform(rng, -3e-7, 3e-7);
        case 2: return testing::uniform(rng, -1e-3, 1e-3);
        default: return testing::uniform(rng, -5, 5);
      }
    };
    const double mu = draw();
    const double nu = draw();
    const FirstOrderData d = corner_for(mu, nu);
    const MultiplierClass c = classify_multiplier(d, classify_indices(d, {}), pair_mult(mu, nu), 1e-7);
    ++seen[static_cast<std::size_t>(c)];
    if (strength(c) >= strength(MultiplierClass::kS)) { ASSERT_TRUE(m_condition_holds(mu, nu, 1e-7)); }
    if (strength(c) >= strength(MultiplierClass::kM)) { ASSERT_TRUE(a_condition_holds(mu, nu, 1e-7)); }
    // The raw predicates nest S ⇒ M; M ⇒ A fails at tolerance scale (a tiny
    // product with both factors slightly negative), which is why the
    // classifier checks every weaker class explicitly.
    if (s_condition_holds(mu, nu, 1e-7)) { ASSERT_TRUE(m_condition_holds(mu, nu, 1e-7)) << mu << "," << nu; }
  }
  for (int k : seen) EXPECT_GT(k, 0);
}

TEST(SynthesizeBranchMultipliers, Examples) {
  const FirstOrderData d = testing::corner_instance(1, 1);
  const IndexSets s = classify_indices(d, {});
  for (Branch b : {Branch::kOne, Branch::kTwo}) {
    const auto m = synthesize_branch_multipliers(d, s, BranchAssignment{{b}});
    ASSERT_TRUE(m.has_value());
    EXPECT_NEAR(m->mu(0), 1.0, 1e-12);
    EXPECT_NEAR(m->nu(0), 1.0, 1e-12);
  }

  const FirstOrderData z = testing::corner_instance(0, 0);
  for (Branch b : {Branch::kOne, Branch::kTwo}) {
    const auto m = synthesize_branch_multipliers(z, s, BranchAssignment{{b}});
    ASSERT_TRUE(m.has_value());
    EXPECT_EQ(m->stacked().lpNorm<Eigen::Infinity>(), 0.0);
  }

  const FirstOrderData down = testing::corner_instance(-1, 0);
  EXPECT_FALSE(synthesize_branch_multipliers(down, s, BranchAssignment{{Branch::kOne}}).has_value());
  const auto two = synthesize_branch_multipliers(down, s, BranchAssignment{{Branch::kTwo}});
  ASSERT_TRUE(two.has_value());
  EXPECT_NEAR(two->mu(0), -1.0, 1e-12);
  EXPECT_NEAR(two->nu(0), 0.0, 1e-12);
}

TEST(SchinabeckCombine, Examples) {
  {
    const CombineResult r = schinabeck_combine(
        {pair_point(1, -1, Branch::kOne), pair_point(-1, 1, Branch::kTwo)}, {0});
    EXPECT_NEAR(r.multipliers.mu(0), 0.0, 1e-12);
    EXPECT_NEAR(r.multipliers.nu(0), 0.0, 1e-12);
    EXPECT_NEAR(r.weights(0), 0.5, 1e-12);
  }
  {
    const CombineResult r =
        schinabeck_combine({pair_point(2, 1, Branch::kOne), pair_point(2, 1, Branch::kTwo)}, {0});
    EXPECT_NEAR(r.multipliers.mu(0), 2.0, 1e-12);
    EXPECT_NEAR(r.multipliers.nu(0), 1.0, 1e-12);
  }
  {
    const CombineResult r = schinabeck_combine(
        {pair_point(3, -2, Branch::kOne), pair_point(-1, 4, Branch::kTwo)}, {0});
    EXPECT_NEAR(r.multipliers.mu(0), 15.0 / 13.0, 1e-12);
    EXPECT_NEAR(r.multipliers.nu(0), 10.0 / 13.0, 1e-12);
    ASSERT_EQ(r.branch_minima.size(), 2u);
    EXPECT_NEAR(r.branch_minima[0].norm_sq, r.branch_minima[1].norm_sq, 1e-12);
    // Tie goes to the lexicographically smallest α.
    EXPECT_EQ(r.selected, 0u);
  }
}

TEST(SchinabeckCombine, InputOrderDoesNotMatter) {
  const CombineResult a = schinabeck_combine(
      {pair_point(3, -2, Branch::kOne), pair_point(-1, 4, Branch::kTwo)}, {0});
  const CombineResult b = schinabeck_combine(
      {pair_point(-1, 4, Branch::kTwo), pair_point(3, -2, Branch::kOne)}, {0});
  EXPECT_EQ(a.multipliers, b.multipliers);
  EXPECT_EQ(a.selected, b.selected);
  EXPECT_EQ(a.weights(0), b.weights(1));
}

TEST(SchinabeckCombine, RejectsBadInput) {
  // Missing pattern.
  EXPECT_THROW(schinabeck_combine({pair_point(1, 1, Branch::kOne)}, {0}), Error);
  // Duplicate pattern.
  EXPECT_THROW(
      schinabeck_combine({pair_point(1, 1, Branch::kOne), pair_point(1, 1, Branch::kOne)}, {0}), Error);
  // Point outside its own sign region.
  EXPECT_THROW(
      schinabeck_combine({pair_point(-1, 1, Branch::kOne), pair_point(-1, 1, Branch::kTwo)}, {0}), Error);
}

TEST(SchinabeckCombine, CarriesLambdaAndEta) {
  std::vector<BranchPoint> pts = {pair_point(1, -1, Branch::kOne), pair_point(-1, 1, Branch::kTwo)};
  pts[0].multipliers.lambda = vec({2.0});
  pts[1].multipliers.lambda = vec({4.0});
  pts[0].multipliers.eta = vec({-1.0, 0.0});
  pts[1].multipliers.eta = vec({1.0, 6.0});
  const CombineResult r = schinabeck_combine(pts, {0});
  EXPECT_NEAR(r.multipliers.lambda(0), 3.0, 1e-12);
  EXPECT_NEAR(r.multipliers.eta(0), 0.0, 1e-12);
  EXPECT_NEAR(r.multipliers.eta(1), 3.0, 1e-12);
}

// Random points placed in their own sign regions: the combination is convex,
// meets the M condition, and its norm is the largest branch minimum.
TEST(SchinabeckCombineProperty, LemmaPostcondition) {
  testing::Rng rng(31);
  for (int trial = 0; trial < 500; ++trial) {
    const Index p = testing::uniform_int(rng, 1, 5);
    const auto pts = testing::random_branch_points(rng, p, testing::uniform_int(rng, 0, 2),
                                                   testing::uniform_int(rng, 0, 2));
    std::vector<Index> biactive;
    for (Index i = 0; i < p; ++i) biactive.push_back(i);
    const CombineResult r = schinabeck_combine(pts, biactive);
    ASSERT_EQ(r.weights.size(), static_cast<Index>(pts.size()));
    EXPECT_GE(r.weights.minCoeff(), -1e-9);
    EXPECT_NEAR(r.weights.sum(), 1.0, 1e-9);
    MultiplierVector mix = MultiplierVector::zeros(pts[0].multipliers.lambda.size(),
                                                   pts[0].multipliers.eta.size(), p);
    for (std::size_t k = 0; k < pts.size(); ++k) {
      const double w = r.weights(static_cast<Index>(k));
      mix.lambda += w * pts[k].multipliers.lambda;
      mix.eta += w * pts[k].multipliers.eta;
      mix.mu += w * pts[k].multipliers.mu;
      mix.nu += w * pts[k].multipliers.nu;
    }
    EXPECT_LE((mix.stacked() - r.multipliers.stacked()).lpNorm<Eigen::Infinity>(), 1e-9);
    for (Index i = 0; i < p; ++i) {
      const double mu = r.multipliers.mu(i);
      const double nu = r.multipliers.nu(i);
      EXPECT_TRUE((mu > 1e-7 && nu > 1e-7) || std::abs(mu * nu) <= 1e-7)
          << "trial " << trial << " index " << i << " (" << mu << "," << nu << ")";
    }
    double best = 0.0;
    for (const BranchMinimum& bm : r.branch_minima) best = std::max(best, bm.norm_sq);
    EXPECT_NEAR(r.multipliers.complementarity_part().squaredNorm(), best, 1e-9 * (1 + best));
    EXPECT_EQ(r.branch_minima.size(), pts.size());
    EXPECT_LE(r.qp_count, pts.size());
  }
}

TEST(CertifyMStationarity, Examples) {
  {
    const StationarityVerdict v = certify_m_stationarity(testing::corner_instance(1, 1));
    EXPECT_EQ(v.kind, VerdictKind::kS);
    ASSERT_TRUE(v.witness.has_value());
    EXPECT_NEAR(v.witness->mu(0), 1.0, 1e-9);
    EXPECT_NEAR(v.witness->nu(0), 1.0, 1e-9);
    EXPECT_EQ(v.branch_lp_count, 2u);
  }
  {
    FirstOrderData d = FirstOrderData::zeros(1, 1, 0, 0);
    d.grad_f = vec({1.0});
    d.grad_g = mat({{-1.0}});
    const StationarityVerdict v = certify_m_stationarity(d);
    EXPECT_EQ(v.kind, VerdictKind::kM);
    ASSERT_TRUE(v.witness.has_value());
    EXPECT_NEAR(v.witness->lambda(0), 1.0, 1e-12);
    EXPECT_EQ(v.branch_lp_count, 1u);
  }
  {
    const StationarityVerdict v = certify_m_stationarity(testing::corner_instance(-1, 0));
    EXPECT_EQ(v.kind, VerdictKind::kBranchInfeasible);
    ASSERT_TRUE(v.failed_branch.has_value());
    EXPECT_EQ(v.failed_branch->to_string(), "(1)");
    EXPECT_FALSE(v.witness.has_value());
  }
}

TEST(CertifyMStationarity, Errors) {
  FirstOrderData bad = testing::corner_instance(1, 1);
  bad.G_vals = vec({1.0});
  bad.H_vals = vec({1.0});
  try {
    certify_m_stationarity(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInfeasiblePoint);
  }

  FirstOrderData wide = FirstOrderData::zeros(3, 0, 0, 3);
  wide.grad_G = Matrix::Identity(3, 3);
  wide.grad_H = Matrix::Identity(3, 3);
  try {
    certify_m_stationarity(wide, {}, CertifyOptions{2});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kBranchBudgetExceeded);
  }
  EXPECT_TRUE(certify_m_stationarity(wide, {}, CertifyOptions{3}).certified());
}

// min x₁ + x₂ - x₃ s.t. -4x₁ + x₃ <= 0, -4x₂ + x₃ <= 0,
// 0 <= x₁ ⊥ x₂ >= 0. The origin is the minimizer, M- but not S-stationary.
TEST(CertifyMStationarity, MButNotS) {
  AffineInstance inst = make_affine(3, 2, 0, 1);
  inst.c = vec({1, 1, -1});
  inst.A_g = mat({{-4, 0, 1}, {0, -4, 1}});
  inst.A_G = mat({{1, 0, 0}});
  inst.A_H = mat({{0, 1, 0}});
  const FirstOrderData d = evaluate_affine(inst, Vector::Zero(3));
  const StationarityVerdict v = certify_m_stationarity(d);
  EXPECT_EQ(v.kind, VerdictKind::kM);
  ASSERT_TRUE(v.witness.has_value());
  EXPECT_FALSE(oracle_s_exists(d, v.sets).has_value());
  EXPECT_TRUE(oracle_m_exists(d, v.sets, Tolerances{}).exists);
}

// Planted multipliers: S-type planting makes every branch feasible; the
// result is a certified witness whose residuals are within cert_tol, and the
// pattern oracle agrees.
TEST(CertifyMStationarityProperty, CertifiesPlantedInstances) {
  testing::Rng rng(37);
  int certified = 0;
  int branch_infeasible = 0;
  for (int trial = 0; trial < 150; ++trial) {
    const Index n = testing::uniform_int(rng, 2, 6);
    AffineInstance inst = testing::random_affine_at_origin(rng, n, testing::uniform_int(rng, 0, 3),
                                                           testing::uniform_int(rng, 0, 2),
                                                           testing::uniform_int(rng, 1, 4));
    FirstOrderData d = evaluate_affine(inst, Vector::Zero(n));
    const IndexSets s = classify_indices(d, {});
    const int kind = trial % 3;
    testing::plant_gradient(inst, testing::random_supported_multipliers(rng, d, s, kind));
    d = evaluate_affine(inst, Vector::Zero(n));
    const StationarityVerdict v = certify_m_stationarity(d);
    EXPECT_EQ(v.branch_lp_count, std::size_t{1} << s.biactive().size());
    if (kind == 0) { EXPECT_TRUE(v.certified()) << "trial " << trial << " " << v.message; }
    if (v.kind == VerdictKind::kBranchInfeasible) {
      ++branch_infeasible;
      continue;
    }
    ASSERT_TRUE(v.certified()) << "trial " << trial << " " << v.message;
    ++certified;
    const ResidualReport r = check_stationarity_system(d, s, *v.witness);
    EXPECT_LE(r.system_violation(), 1e-7);
    const MultiplierClass c = classify_multiplier(d, s, *v.witness, 1e-7);
    EXPECT_GE(strength(c), strength(MultiplierClass::kM));
    EXPECT_EQ(c == MultiplierClass::kS, v.kind == VerdictKind::kS);
    ASSERT_TRUE(v.combination.has_value());
    EXPECT_LE(v.combination->qp_count, v.branches.size());
    // Combination of branch witnesses that each satisfy the linear system.
    for (const BranchRecord& b : v.branches) {
      EXPECT_LE(check_stationarity_system(d, s, *b.multipliers).system_violation(), 1e-9);
    }
    OracleResult o = oracle_m_exists(d, s, Tolerances{});
    if (!o.exists) o = oracle_m_exists(d, s, 1e-8);
    EXPECT_TRUE(o.exists) << "trial " << trial;
  }
  EXPECT_GT(certified, 50);
  EXPECT_GT(branch_infeasible, 0);
}

// If the pattern oracle proves no M-multiplier exists, certification must not
// claim M.
TEST(CertifyMStationarityProperty, ExclusiveWithNegativeOracle) {
  testing::Rng rng(41);
  int negatives = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const Index n = testing::uniform_int(rng, 2, 5);
    AffineInstance inst = testing::random_affine_at_origin(rng, n, testing::uniform_int(rng, 0, 2), 0,
                                                           testing::uniform_int(rng, 1, 3));
    inst.c = testing::random_vector(rng, n);
    const FirstOrderData d = evaluate_affine(inst, Vector::Zero(n));
    const IndexSets s = classify_indices(d, {});
    const OracleResult o = oracle_m_exists(d, s, 1e-9);
    const StationarityVerdict v = certify_m_stationarity(d);
    if (!o.exists) {
      ++negatives;
      EXPECT_FALSE(v.certified()) << "trial " << trial;
    }
    if (v.certified()) { EXPECT_TRUE(o.exists) << "trial " << trial; }
  }
  EXPECT_GT(negatives, 0);
}

}  // namespace
}  // namespace mstat
