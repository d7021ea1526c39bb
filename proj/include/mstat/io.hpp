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

// JSON problem files, multiplier files and certificate reports.
//
// A problem file is an object with "mode": "point-data" or "affine".
//
//   point-data: grad_f, g_vals, grad_g, h_vals, grad_h, G_vals, grad_G,
//               H_vals, grad_H (matrices row-major, one row per constraint),
//               optional n, l, m, p as consistency checks
//   affine:     c, optional Q, A_g/b_g, A_h/b_h, A_G/b_G, A_H/b_H, x_bar
//
// Both accept an optional "tolerances" object and a free-form "description".
// Indices in reports are 1-based.

#pragma once

#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "json.hpp"
#include "mstat/oracle.hpp"
#include "mstat/stationarity.hpp"

namespace mstat::io {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

struct Problem {
  std::string mode;
  FirstOrderData data;
  Tolerances tol;
  std::optional<AffineInstance> affine;
  std::optional<Vector> x_bar;
};

namespace detail {

[[noreturn]] inline void parse_fail(const std::string& what) { throw Error(ErrorKind::kParseError, what); }

inline void reject_unknown(const Json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) parse_fail("unknown field '" + key + "' in " + where);
  }
}

inline Vector to_vector(const Json& j, const std::string& field) {
  if (!j.is_array()) parse_fail("field '" + field + "' must be an array of numbers");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) parse_fail("field '" + field + "' entry " + std::to_string(i + 1) + " is not a number");
    v(static_cast<Index>(i)) = j[i].get<double>();
  }
  return v;
}

inline Matrix to_matrix(const Json& j, Index cols, const std::string& field) {
  if (!j.is_array()) parse_fail("field '" + field + "' must be an array of rows");
  Matrix a(static_cast<Index>(j.size()), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    const Vector row = to_vector(j[r], field + "[" + std::to_string(r + 1) + "]");
    if (row.size() != cols) {
      parse_fail("field '" + field + "' row " + std::to_string(r + 1) + " has " + std::to_string(row.size()) +
                 " entries, expected " + std::to_string(cols));
    }
    a.row(static_cast<Index>(r)) = row.transpose();
  }
  return a;
}

inline Vector vector_or_empty(const Json& obj, const std::string& field) {
  return obj.contains(field) ? to_vector(obj.at(field), field) : Vector(0);
}

inline Matrix matrix_or_empty(const Json& obj, const std::string& field, Index cols) {
  return obj.contains(field) ? to_matrix(obj.at(field), cols, field) : Matrix(0, cols);
}

inline void check_count(const Json& obj, const std::string& field, Index actual) {
  if (!obj.contains(field)) return;
  if (!obj.at(field).is_number_integer() || obj.at(field).get<Index>() != actual) {
    parse_fail("field '" + field + "' does not match the data (" + std::to_string(actual) + ")");
  }
}

inline void require_rows(const Matrix& a, const Vector& b, const std::string& an, const std::string& bn) {
  if (a.rows() != b.size()) {
    parse_fail("field '" + an + "' has " + std::to_string(a.rows()) + " rows but '" + bn + "' has " +
               std::to_string(b.size()) + " entries");
  }
}

inline Json to_json(const Vector& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

inline Json one_based(const std::vector<Index>& idx) {
  Json a = Json::array();
  for (Index i : idx) a.push_back(i + 1);
  return a;
}

}  // namespace detail

inline Tolerances parse_tolerances(const Json& j, Tolerances base = {}) {
  if (!j.is_object()) detail::parse_fail("field 'tolerances' must be an object");
  detail::reject_unknown(j, {"active_tol", "feas_tol", "solver_tol", "cert_tol"}, "tolerances");
  auto take = [&](const char* key, double& out) {
    if (!j.contains(key)) return;
    if (!j.at(key).is_number()) detail::parse_fail(std::string("field '") + key + "' must be a number");
    out = j.at(key).get<double>();
  };
  take("active_tol", base.active_tol);
  take("feas_tol", base.feas_tol);
  take("solver_tol", base.solver_tol);
  take("cert_tol", base.cert_tol);
  validate(base);
  return base;
}

inline Problem parse_problem(const Json& j) {
  using namespace detail;
  if (!j.is_object()) parse_fail("problem file must contain a JSON object");
  if (!j.contains("mode") || !j.at("mode").is_string()) parse_fail("missing string field 'mode'");
  Problem prob;
  prob.mode = j.at("mode").get<std::string>();
  if (prob.mode == "point-data") {
    reject_unknown(j,
                   {"mode", "description", "tolerances", "n", "l", "m", "p", "grad_f", "g_vals", "grad_g",
                    "h_vals", "grad_h", "G_vals", "grad_G", "H_vals", "grad_H"},
                   "point-data problem");
    if (!j.contains("grad_f")) parse_fail("missing field 'grad_f'");
    FirstOrderData& d = prob.data;
    d.grad_f = to_vector(j.at("grad_f"), "grad_f");
    d.n = d.grad_f.size();
    d.g_vals = vector_or_empty(j, "g_vals");
    d.h_vals = vector_or_empty(j, "h_vals");
    d.G_vals = vector_or_empty(j, "G_vals");
    d.H_vals = vector_or_empty(j, "H_vals");
    d.l = d.g_vals.size();
    d.m = d.h_vals.size();
    d.p = d.G_vals.size();
    d.grad_g = matrix_or_empty(j, "grad_g", d.n);
    d.grad_h = matrix_or_empty(j, "grad_h", d.n);
    d.grad_G = matrix_or_empty(j, "grad_G", d.n);
    d.grad_H = matrix_or_empty(j, "grad_H", d.n);
    require_rows(d.grad_g, d.g_vals, "grad_g", "g_vals");
    require_rows(d.grad_h, d.h_vals, "grad_h", "h_vals");
    require_rows(d.grad_G, d.G_vals, "grad_G", "G_vals");
    require_rows(d.grad_H, d.H_vals, "grad_H", "H_vals");
    if (d.H_vals.size() != d.p) parse_fail("fields 'G_vals' and 'H_vals' differ in length");
    check_count(j, "n", d.n);
    check_count(j, "l", d.l);
    check_count(j, "m", d.m);
    check_count(j, "p", d.p);
    validate(d);
  } else if (prob.mode == "affine") {
    reject_unknown(j,
                   {"mode", "description", "tolerances", "Q", "c", "A_g", "b_g", "A_h", "b_h", "A_G", "b_G",
                    "A_H", "b_H", "x_bar"},
                   "affine problem");
    if (!j.contains("c")) parse_fail("missing field 'c'");
    if (!j.contains("x_bar")) parse_fail("missing field 'x_bar'");
    AffineInstance inst;
    inst.c = to_vector(j.at("c"), "c");
    const Index n = inst.c.size();
    inst.Q = j.contains("Q") ? to_matrix(j.at("Q"), n, "Q") : Matrix::Zero(n, n);
    if (inst.Q.rows() != n) parse_fail("field 'Q' must be square of size " + std::to_string(n));
    inst.A_g = matrix_or_empty(j, "A_g", n);
    inst.b_g = vector_or_empty(j, "b_g");
    inst.A_h = matrix_or_empty(j, "A_h", n);
    inst.b_h = vector_or_empty(j, "b_h");
    inst.A_G = matrix_or_empty(j, "A_G", n);
    inst.b_G = vector_or_empty(j, "b_G");
    inst.A_H = matrix_or_empty(j, "A_H", n);
    inst.b_H = vector_or_empty(j, "b_H");
    require_rows(inst.A_g, inst.b_g, "A_g", "b_g");
    require_rows(inst.A_h, inst.b_h, "A_h", "b_h");
    require_rows(inst.A_G, inst.b_G, "A_G", "b_G");
    require_rows(inst.A_H, inst.b_H, "A_H", "b_H");
    if (inst.A_G.rows() != inst.A_H.rows()) parse_fail("fields 'A_G' and 'A_H' differ in row count");
    const Vector x = to_vector(j.at("x_bar"), "x_bar");
    if (x.size() != n) parse_fail("field 'x_bar' has length " + std::to_string(x.size()) + ", expected " + std::to_string(n));
    prob.data = evaluate_affine(inst, x);
    prob.affine = std::move(inst);
    prob.x_bar = x;
  } else {
    parse_fail("field 'mode' must be \"point-data\" or \"affine\", got \"" + prob.mode + "\"");
  }
  if (j.contains("tolerances")) prob.tol = parse_tolerances(j.at("tolerances"));
  return prob;
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) detail::parse_fail("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    // The library message already carries line and column.
    detail::parse_fail(path + ": " + e.what());
  }
}

inline Problem load_problem(const std::string& path) {
  try {
    return parse_problem(read_json_file(path));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kParseError) throw Error(ErrorKind::kParseError, path + ": " + e.detail());
    throw;
  }
}

// Accepts a bare {"lambda", "eta", "mu", "nu"} object or a certificate report
// carrying one under "witness". Omitted blocks are zero.
inline MultiplierVector parse_multipliers(const Json& j, const FirstOrderData& d) {
  using namespace detail;
  if (!j.is_object()) parse_fail("multiplier file must contain a JSON object");
  if (j.contains("witness")) {
    if (j.at("witness").is_null()) parse_fail("report has no witness");
    return parse_multipliers(j.at("witness"), d);
  }
  reject_unknown(j, {"lambda", "eta", "mu", "nu", "description"}, "multipliers");
  MultiplierVector mult = MultiplierVector::zeros(d.l, d.m, d.p);
  auto take = [&](const char* key, Vector& out) {
    if (j.contains(key)) out = to_vector(j.at(key), key);
  };
  take("lambda", mult.lambda);
  take("eta", mult.eta);
  take("mu", mult.mu);
  take("nu", mult.nu);
  check_shape(mult, d);
  return mult;
}

inline Json multipliers_json(const MultiplierVector& m) {
  return Json{{"lambda", detail::to_json(m.lambda)},
              {"eta", detail::to_json(m.eta)},
              {"mu", detail::to_json(m.mu)},
              {"nu", detail::to_json(m.nu)}};
}

inline Json tolerances_json(const Tolerances& t) {
  return Json{{"active_tol", t.active_tol},
              {"feas_tol", t.feas_tol},
              {"solver_tol", t.solver_tol},
              {"cert_tol", t.cert_tol}};
}

inline Json index_sets_json(const IndexSets& s) {
  return Json{{"active_g", detail::one_based(s.active_g)},
              {"plus_zero", detail::one_based(s.plus_zero)},
              {"zero_plus", detail::one_based(s.zero_plus)},
              {"zero_zero", detail::one_based(s.zero_zero)}};
}

inline Json feasibility_json(const FeasibilityReport& r) {
  Json v = Json::array();
  for (const Violation& x : r.violations) v.push_back(Json{{"constraint", x.constraint}, {"amount", x.amount}});
  return Json{{"feasible", r.feasible},
              {"max_violation", r.max_violation},
              {"complementarity_violation", r.complementarity_violation},
              {"worst", r.worst.empty() ? Json(nullptr) : Json(r.worst)},
              {"violations", v}};
}

inline Json problem_json(const Problem& p) {
  return Json{{"mode", p.mode}, {"n", p.data.n}, {"l", p.data.l}, {"m", p.data.m}, {"p", p.data.p}};
}

inline Json oracle_json(const OracleResult& o) {
  Json pattern = Json::array();
  for (Pattern x : o.pattern) pattern.push_back(to_string(x));
  return Json{{"exists", o.exists},
              {"pattern", o.exists ? pattern : Json(nullptr)},
              {"margin", o.exists ? Json(o.margin) : Json(nullptr)},
              {"witness", o.witness ? multipliers_json(*o.witness) : Json(nullptr)},
              {"lp_count", o.lp_count}};
}

inline Json verdict_json(const StationarityVerdict& v) {
  Json branches = Json::array();
  for (const BranchRecord& b : v.branches) {
    branches.push_back(Json{{"alpha", b.alpha.to_string()},
                            {"status", b.feasible ? "Optimal" : "Infeasible"},
                            {"multiplier_norm", b.multipliers ? Json(b.multipliers->stacked().norm()) : Json(nullptr)}});
  }
  Json combiner = nullptr;
  if (v.combination) {
    const CombineResult& c = *v.combination;
    Json minima = Json::array();
    for (const BranchMinimum& bm : c.branch_minima) {
      minima.push_back(Json{{"alpha", bm.alpha.to_string()}, {"norm_sq", bm.norm_sq}});
    }
    combiner = Json{{"branch_minima", minima},
                    {"selected", c.branch_minima[c.selected].alpha.to_string()},
                    {"weights", detail::to_json(c.weights)},
                    {"qp_count", c.qp_count}};
  }
  Json residuals = Json::object();
  for (const auto& [k, x] : v.residuals) residuals[k] = x;
  return Json{{"verdict", to_string(v.kind)},
              {"message", v.message},
              {"index_sets", index_sets_json(v.sets)},
              {"witness", v.witness ? multipliers_json(*v.witness) : Json(nullptr)},
              {"failed_branch", v.failed_branch ? Json(v.failed_branch->to_string()) : Json(nullptr)},
              {"branch_lp_count", v.branch_lp_count},
              {"branches", branches},
              {"combiner", combiner},
              {"residuals", residuals}};
}

inline Json residuals_json(const ResidualReport& r) {
  Json bi = Json::array();
  for (const BiactivePair& b : r.biactive) bi.push_back(Json{{"index", b.index + 1}, {"mu", b.mu}, {"nu", b.nu}});
  Json out = Json::object();
  for (const auto& [k, x] : r.as_map()) out[k] = x;
  out["system_violation"] = r.system_violation();
  out["biactive"] = bi;
  return out;
}

// Plain-text rendering used when --json is not given.
inline std::string format_vector(const Vector& v) {
  std::ostringstream os;
  os.precision(17);
  os << "[";
  for (Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v(i);
  os << "]";
  return os.str();
}

inline std::string format_indices(const std::vector<Index>& idx) {
  std::string s = "{";
  for (std::size_t k = 0; k < idx.size(); ++k) s += (k ? "," : "") + std::to_string(idx[k] + 1);
  return s + "}";
}

}  // namespace mstat::io
