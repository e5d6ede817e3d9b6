// Copyright 2026 The Poolclr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef POOLCLR_ERRORS_HPP_
#define POOLCLR_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace poolclr {

enum class Errc {
  // Cohort validation.
  kDuplicateSubject,
  kStratumWithoutCase,
  kStratumWithMultipleCases,
  kStratumWithoutControl,
  kMissingCovariate,
  kNonFiniteValue,
  // Term grammar and evaluation.
  kParseError,
  kUnknownVariable,
  kDomainError,
  // Fitting.
  kDimensionMismatch,
  kAliasedCovariate,
  kSeparationDetected,
  kSingularHessian,
  kNotConverged,
  kNotNested,
  kStrataMismatch,
  // Pooling.
  kInvalidPoolsize,
  kInfeasible,
  kPlanMismatch,
  kSparseLabelClass,
  // Distributed protocol.
  kNodeUnreachable,
  kMatchingRatioMismatch,
  kUnknownStratum,
  kRangeExceeded,
  kRingBroken,
  // Simulation.
  kGenerationStalled,
  // Input and configuration plumbing.
  kIoError,
  kConfigError,
};

// Stable name used in messages and machine-readable output, e.g.
// "AliasedCovariate" for Errc::kAliasedCovariate.
const char* errc_name(Errc code);

// Process exit code contract: 1 for input/configuration problems, 2 for
// numerical failures (non-convergence, separation, singular Hessian).
int errc_exit_code(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  Errc code() const noexcept { return code_; }
  int exit_code() const noexcept { return errc_exit_code(code_); }

 private:
  Errc code_;
};

// Grammar errors additionally carry the byte offset of the first character
// that could not be consumed.
class ParseError : public Error {
 public:
  ParseError(std::size_t offset, const std::string& message)
      : Error(Errc::kParseError,
              message + " at offset " + std::to_string(offset)),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

inline const char* errc_name(Errc code) {
  switch (code) {
    case Errc::kDuplicateSubject: return "DuplicateSubject";
    case Errc::kStratumWithoutCase: return "StratumWithoutCase";
    case Errc::kStratumWithMultipleCases: return "StratumWithMultipleCases";
    case Errc::kStratumWithoutControl: return "StratumWithoutControl";
    case Errc::kMissingCovariate: return "MissingCovariate";
    case Errc::kNonFiniteValue: return "NonFiniteValue";
    case Errc::kParseError: return "ParseError";
    case Errc::kUnknownVariable: return "UnknownVariable";
    case Errc::kDomainError: return "DomainError";
    case Errc::kDimensionMismatch: return "DimensionMismatch";
    case Errc::kAliasedCovariate: return "AliasedCovariate";
    case Errc::kSeparationDetected: return "SeparationDetected";
    case Errc::kSingularHessian: return "SingularHessian";
    case Errc::kNotConverged: return "NotConverged";
    case Errc::kNotNested: return "NotNested";
    case Errc::kStrataMismatch: return "StrataMismatch";
    case Errc::kInvalidPoolsize: return "InvalidPoolsize";
    case Errc::kInfeasible: return "Infeasible";
    case Errc::kPlanMismatch: return "PlanMismatch";
    case Errc::kSparseLabelClass: return "SparseLabelClass";
    case Errc::kNodeUnreachable: return "NodeUnreachable";
    case Errc::kMatchingRatioMismatch: return "MatchingRatioMismatch";
    case Errc::kUnknownStratum: return "UnknownStratum";
    case Errc::kRangeExceeded: return "RangeExceeded";
    case Errc::kRingBroken: return "RingBroken";
    case Errc::kGenerationStalled: return "GenerationStalled";
    case Errc::kIoError: return "IoError";
    case Errc::kConfigError: return "ConfigError";
  }
  return "Error";
}

inline int errc_exit_code(Errc code) {
  switch (code) {
    case Errc::kSeparationDetected:
    case Errc::kSingularHessian:
    case Errc::kNotConverged:
      return 2;
    default:
      return 1;
  }
}

}  // namespace poolclr

#endif  // POOLCLR_ERRORS_HPP_
