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

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mstat/core_model.hpp"

namespace mstat {

// Multipliers of g (lambda), h (eta), G (mu) and H (nu).
struct MultiplierVector {
  Vector lambda;
  Vector eta;
  Vector mu;
  Vector nu;

  static MultiplierVector zeros(Index l, Index m, Index p) {
    return {Vector::Zero(l), Vector::Zero(m), Vector::Zero(p), Vector::Zero(p)};
  }

  // (mu, nu) stacked, the coordinates the combination norm is taken over.
  Vector complementarity_part() const {
    Vector v(mu.size() + nu.size());
    v << mu, nu;
    return v;
  }

  Vector stacked() const {
    Vector v(lambda.size() + eta.size() + mu.size() + nu.size());
    v << lambda, eta, mu, nu;
    return v;
  }

  bool operator==(const MultiplierVector&) const = default;
};

inline void check_shape(const MultiplierVector& mult, const FirstOrderData& d) {
  detail::check_vector(mult.lambda, d.l, "lambda");
  detail::check_vector(mult.eta, d.m, "eta");
  detail::check_vector(mult.mu, d.p, "mu");
  detail::check_vector(mult.nu, d.p, "nu");
}

// Which multiplier sign is enforced at a biactive index: kOne keeps mu_i >= 0
// (and ∇H_iᵀd = 0 in the branch cone), kTwo keeps nu_i >= 0.
enum class Branch : std::uint8_t { kOne = 1, kTwo = 2 };

struct BranchAssignment {
  std::vector<Branch> choices;

  static BranchAssignment all_one(Index p) {
    return {std::vector<Branch>(static_cast<std::size_t>(p), Branch::kOne)};
  }

  Branch operator[](Index i) const { return choices[static_cast<std::size_t>(i)]; }
  Index size() const { return static_cast<Index>(choices.size()); }

  std::string to_string() const {
    std::string s = "(";
    for (std::size_t i = 0; i < choices.size(); ++i) {
      if (i) s += ",";
      s += choices[i] == Branch::kOne ? "1" : "2";
    }
    return s + ")";
  }

  auto operator<=>(const BranchAssignment&) const = default;
};

// All 2^|biactive| assignments in lexicographic order (first biactive index
// most significant, 1 before 2). Entries outside the biactive set are 1.
inline std::vector<BranchAssignment> enumerate_branches(Index p, const std::vector<Index>& biactive) {
  const std::size_t k = biactive.size();
  detail::require(k < 63, ErrorKind::kBranchBudgetExceeded, "too many biactive indices");
  std::vector<BranchAssignment> out;
  out.reserve(std::size_t{1} << k);
  for (std::uint64_t code = 0; code < (std::uint64_t{1} << k); ++code) {
    BranchAssignment a = BranchAssignment::all_one(p);
    for (std::size_t j = 0; j < k; ++j) {
      if ((code >> (k - 1 - j)) & 1u) {
        a.choices[static_cast<std::size_t>(biactive[j])] = Branch::kTwo;
      }
    }
    out.push_back(std::move(a));
  }
  return out;
}

}  // namespace mstat
