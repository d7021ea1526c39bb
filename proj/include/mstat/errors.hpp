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

#include <stdexcept>
#include <string>
#include <string_view>

namespace mstat {

enum class ErrorKind {
  kDimensionMismatch,
  kInvalidData,
  kInfeasiblePoint,
  kNumericalFailure,
  kSystemViolated,
  kBranchBudgetExceeded,
  kPatternBudgetExceeded,
  kPostconditionViolated,
  kNotAffine,
  kParseError,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kDimensionMismatch: return "DimensionMismatch";
    case ErrorKind::kInvalidData: return "InvalidData";
    case ErrorKind::kInfeasiblePoint: return "InfeasiblePoint";
    case ErrorKind::kNumericalFailure: return "NumericalFailure";
    case ErrorKind::kSystemViolated: return "SystemViolated";
    case ErrorKind::kBranchBudgetExceeded: return "BranchBudgetExceeded";
    case ErrorKind::kPatternBudgetExceeded: return "PatternBudgetExceeded";
    case ErrorKind::kPostconditionViolated: return "PostconditionViolated";
    case ErrorKind::kNotAffine: return "NotAffine";
    case ErrorKind::kParseError: return "ParseError";
  }
  return "Unknown";
}

// All library failures are reported through this one exception type; callers
// that need to branch on the failure inspect kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind),
        detail_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  // The message without the kind prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace mstat
