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

#ifndef POOLCLR_TERMS_HPP_
#define POOLCLR_TERMS_HPP_

#include <optional>
#include <string>
#include <vector>

namespace poolclr {

// One multiplicative factor of a model term: a covariate, its natural log,
// or an integer power (k >= 2).
struct TermFactor {
  enum class Kind { kVar, kLog, kPower };

  Kind kind = Kind::kVar;
  std::string name;
  int power = 1;

  friend bool operator==(const TermFactor&, const TermFactor&) = default;
};

// A model term: a single factor or a pairwise interaction of two factors.
//
// Grammar (whitespace-insensitive):
//   term   := atom | atom ":" atom
//   atom   := NAME | "log" "(" NAME ")" | NAME "^" INT
//   NAME   := [A-Za-z_][A-Za-z0-9_.]*
//   INT    := decimal integer >= 2
struct TermSpec {
  TermFactor first;
  std::optional<TermFactor> second;

  friend bool operator==(const TermSpec&, const TermSpec&) = default;
};

// Parses a term from text. Throws ParseError with the byte offset of the
// first unusable character.
TermSpec parse_term_spec(const std::string& text);

// Renders a term in canonical grammar form, e.g. "log(age):marker".
// render_term(parse_term_spec(s)) reparses to an equal TermSpec.
std::string render_term(const TermSpec& term);

std::string render_factor(const TermFactor& factor);

// Covariate names referenced by the term (one or two entries, in factor
// order; a self-interaction lists the name twice).
std::vector<std::string> referenced_variables(const TermSpec& term);

// Evaluates one factor at a covariate value. Throws DomainError when a log
// factor meets a non-positive value.
double evaluate_factor(const TermFactor& factor, double value);

// The largest power appearing across a set of terms (plain and log factors
// count as degree 1). Pools of size <= this degree admit algebraic recovery
// of member values, which drives the planner's disclosure warning.
int max_power_degree(const std::vector<TermSpec>& terms);

}  // namespace poolclr

#endif  // POOLCLR_TERMS_HPP_
