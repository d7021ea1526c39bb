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

// mstat: index sets, M-stationarity certificates and multiplier checks for
// complementarity-constrained programs.
//
//   mstat classify PROBLEM            exit 0 feasible, 2 infeasible
//   mstat certify PROBLEM [--oracle]  exit 0 M/S, 2 branch infeasible,
//                                     3 infeasible point, 4 numerical failure,
//                                     5 branch cap exceeded
//   mstat check PROBLEM MULTIPLIERS   exit 0 if the class meets --require,
//                                     2 below it, 6 system violated
//
// Parse errors exit 1 in every command.

#include <chrono>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "mstat/io.hpp"

namespace {

using mstat::Error;
using mstat::ErrorKind;
using mstat::io::Json;

enum Exit : int {
  kOk = 0,
  kParse = 1,
  kNegative = 2,
  kInfeasible = 3,
  kNumerical = 4,
  kBranchCap = 5,
  kSystemViolated = 6,
};

struct ToleranceFlags {
  std::optional<double> active_tol, feas_tol, solver_tol, cert_tol;

  void add_to(CLI::App* app) {
    app->add_option("--active-tol", active_tol, "activity threshold");
    app->add_option("--feas-tol", feas_tol, "feasibility threshold");
    app->add_option("--solver-tol", solver_tol, "LP/QP tolerance");
    app->add_option("--cert-tol,--tol", cert_tol, "certificate tolerance");
  }

  mstat::Tolerances apply(mstat::Tolerances t) const {
    if (active_tol) t.active_tol = *active_tol;
    if (feas_tol) t.feas_tol = *feas_tol;
    if (solver_tol) t.solver_tol = *solver_tol;
    if (cert_tol) t.cert_tol = *cert_tol;
    mstat::validate(t);
    return t;
  }
};

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

void emit(const Json& report) { std::cout << report.dump(2) << "\n"; }

Json report_header(const char* command, const mstat::io::Problem& prob, const mstat::Tolerances& tol) {
  return Json{{"schema_version", mstat::io::kSchemaVersion},
              {"command", command},
              {"problem", mstat::io::problem_json(prob)},
              {"tolerances", mstat::io::tolerances_json(tol)}};
}

void print_sets(const mstat::IndexSets& s) {
  using mstat::io::format_indices;
  std::cout << "I^g   = " << format_indices(s.active_g) << "\n"
            << "I^+0  = " << format_indices(s.plus_zero) << "\n"
            << "I^0+  = " << format_indices(s.zero_plus) << "\n"
            << "I^00  = " << format_indices(s.zero_zero) << "\n";
}

void print_multipliers(const mstat::MultiplierVector& m) {
  using mstat::io::format_vector;
  std::cout << "  lambda = " << format_vector(m.lambda) << "\n"
            << "  eta    = " << format_vector(m.eta) << "\n"
            << "  mu     = " << format_vector(m.mu) << "\n"
            << "  nu     = " << format_vector(m.nu) << "\n";
}

int run_classify(const std::string& path, const ToleranceFlags& flags, bool json) {
  const auto start = std::chrono::steady_clock::now();
  const mstat::io::Problem prob = mstat::io::load_problem(path);
  const mstat::Tolerances tol = flags.apply(prob.tol);
  const mstat::FeasibilityReport feas = mstat::check_feasibility(prob.data, tol);
  std::optional<mstat::IndexSets> sets;
  if (feas.feasible) sets = mstat::classify_indices(prob.data, tol);

  if (json) {
    Json r = report_header("classify", prob, tol);
    r["feasibility"] = mstat::io::feasibility_json(feas);
    r["index_sets"] = sets ? mstat::io::index_sets_json(*sets) : Json(nullptr);
    r["timing"] = Json{{"total_ms", elapsed_ms(start)}};
    emit(r);
  } else {
    if (sets) print_sets(*sets);
    std::cout << (feas.feasible ? "feasible" : "infeasible") << " (max violation " << feas.max_violation
              << ", complementarity violation " << feas.complementarity_violation << ")\n";
    for (const mstat::Violation& v : feas.violations) {
      std::cout << "  " << v.constraint << ": " << v.amount << "\n";
    }
  }
  return feas.feasible ? kOk : kNegative;
}

int run_certify(const std::string& path, const ToleranceFlags& flags, mstat::Index branch_cap, bool oracle,
                bool json) {
  const auto start = std::chrono::steady_clock::now();
  const mstat::io::Problem prob = mstat::io::load_problem(path);
  const mstat::Tolerances tol = flags.apply(prob.tol);
  const mstat::StationarityVerdict v = mstat::certify_m_stationarity(prob.data, tol, {branch_cap});

  Json oracle_section = nullptr;
  std::optional<mstat::OracleResult> oracle_result;
  std::string oracle_error;
  if (oracle) {
    try {
      oracle_result = mstat::oracle_m_exists(prob.data, v.sets, tol);
      oracle_section = mstat::io::oracle_json(*oracle_result);
    } catch (const Error& e) {
      oracle_error = e.what();
      oracle_section = Json{{"error", oracle_error}};
    }
  }

  if (json) {
    Json r = report_header("certify", prob, tol);
    const Json verdict = mstat::io::verdict_json(v);
    for (const auto& [k, x] : verdict.items()) r[k] = x;
    r["oracle"] = oracle_section;
    r["timing"] = Json{{"total_ms", elapsed_ms(start)}};
    emit(r);
  } else {
    print_sets(v.sets);
    std::cout << "verdict: " << mstat::to_string(v.kind) << "\n";
    if (!v.message.empty()) std::cout << "  " << v.message << "\n";
    for (const mstat::BranchRecord& b : v.branches) {
      std::cout << "branch " << b.alpha.to_string() << ": " << (b.feasible ? "Optimal" : "Infeasible");
      if (b.multipliers) std::cout << ", |multipliers| = " << b.multipliers->stacked().norm();
      std::cout << "\n";
    }
    if (v.combination) {
      const mstat::CombineResult& c = *v.combination;
      for (const mstat::BranchMinimum& bm : c.branch_minima) {
        std::cout << "min-norm " << bm.alpha.to_string() << ": " << bm.norm_sq << "\n";
      }
      std::cout << "selected: " << c.branch_minima[c.selected].alpha.to_string() << "\n";
    }
    if (v.witness) {
      std::cout << "witness:\n";
      print_multipliers(*v.witness);
    }
    for (const auto& [k, x] : v.residuals) std::cout << "residual " << k << " = " << x << "\n";
    if (oracle_result) {
      std::cout << "oracle: M-multiplier " << (oracle_result->exists ? "exists" : "does not exist") << " ("
                << oracle_result->lp_count << " pattern LPs)\n";
      if (oracle_result->witness) print_multipliers(*oracle_result->witness);
    } else if (!oracle_error.empty()) {
      std::cout << "oracle: " << oracle_error << "\n";
    }
  }

  switch (v.kind) {
    case mstat::VerdictKind::kM:
    case mstat::VerdictKind::kS: return kOk;
    case mstat::VerdictKind::kNumericalFailure: return kNumerical;
    default: return kNegative;
  }
}

int run_check(const std::string& path, const std::string& mult_path, const ToleranceFlags& flags,
              const std::string& require, bool json) {
  const auto start = std::chrono::steady_clock::now();
  const mstat::io::Problem prob = mstat::io::load_problem(path);
  const mstat::Tolerances tol = flags.apply(prob.tol);
  mstat::MultiplierVector mult;
  try {
    mult = mstat::io::parse_multipliers(mstat::io::read_json_file(mult_path), prob.data);
  } catch (const Error& e) {
    throw Error(ErrorKind::kParseError, mult_path + ": " + e.detail());
  }
  const mstat::IndexSets sets = mstat::classify_indices(prob.data, tol);
  const mstat::ResidualReport res = mstat::check_stationarity_system(prob.data, sets, mult);
  const mstat::MultiplierClass required = require == "s"   ? mstat::MultiplierClass::kS
                                          : require == "a" ? mstat::MultiplierClass::kA
                                                           : mstat::MultiplierClass::kM;
  std::optional<mstat::MultiplierClass> cls;
  if (res.system_violation() <= tol.cert_tol) cls = mstat::classify_multiplier(prob.data, sets, mult, tol.cert_tol);
  const bool meets = cls && mstat::strength(*cls) >= mstat::strength(required);

  if (json) {
    Json r = report_header("check", prob, tol);
    r["index_sets"] = mstat::io::index_sets_json(sets);
    r["multipliers"] = mstat::io::multipliers_json(mult);
    r["residuals"] = mstat::io::residuals_json(res);
    r["class"] = cls ? Json(mstat::to_string(*cls)) : Json(nullptr);
    r["required"] = mstat::to_string(required);
    r["meets_requirement"] = meets;
    r["timing"] = Json{{"total_ms", elapsed_ms(start)}};
    emit(r);
  } else {
    for (const auto& [k, x] : res.as_map()) std::cout << "residual " << k << " = " << x << "\n";
    for (const mstat::BiactivePair& b : res.biactive) {
      std::cout << "biactive " << b.index + 1 << ": mu = " << b.mu << ", nu = " << b.nu << "\n";
    }
    if (cls) {
      std::cout << "class: " << mstat::to_string(*cls) << " (required " << mstat::to_string(required) << ")\n";
    } else {
      std::cout << "stationarity system violated by " << res.system_violation() << "\n";
    }
  }
  if (!cls) return kSystemViolated;
  return meets ? kOk : kNegative;
}

int exit_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::kParseError:
    case ErrorKind::kDimensionMismatch:
    case ErrorKind::kInvalidData: return kParse;
    case ErrorKind::kInfeasiblePoint: return kInfeasible;
    case ErrorKind::kBranchBudgetExceeded: return kBranchCap;
    case ErrorKind::kSystemViolated: return kSystemViolated;
    default: return kNumerical;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Index sets, M-stationarity certificates and multiplier checks"};
  app.require_subcommand(1);

  ToleranceFlags flags;
  bool json = false;
  std::string problem_path;

  CLI::App* classify = app.add_subcommand("classify", "print index sets and a feasibility report");
  classify->add_option("problem", problem_path, "problem file")->required();

  CLI::App* certify = app.add_subcommand("certify", "certify M-stationarity by branch enumeration");
  certify->add_option("problem", problem_path, "problem file")->required();
  mstat::Index branch_cap = 12;
  bool oracle = false;
  certify->add_option("--branch-cap", branch_cap, "largest biactive set to enumerate")->capture_default_str();
  certify->add_flag("--oracle", oracle, "also run the sign-pattern oracle");

  CLI::App* check = app.add_subcommand("check", "check and classify a given multiplier vector");
  check->add_option("problem", problem_path, "problem file")->required();
  std::string mult_path;
  std::string require = "m";
  check->add_option("multipliers", mult_path, "multiplier file or certify --json report")->required();
  check->add_option("--require", require, "minimum class")
      ->check(CLI::IsMember({"s", "m", "a"}))
      ->capture_default_str();

  for (CLI::App* sub : {classify, certify, check}) {
    flags.add_to(sub);
    sub->add_flag("--json", json, "emit a JSON report");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kParse;
  }

  try {
    if (*classify) return run_classify(problem_path, flags, json);
    if (*certify) return run_certify(problem_path, flags, branch_cap, oracle, json);
    return run_check(problem_path, mult_path, flags, require, json);
  } catch (const Error& e) {
    std::cerr << "mstat: " << e.what() << "\n";
    return exit_for(e);
  }
}
