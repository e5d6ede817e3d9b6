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

#ifndef POOLCLR_MODEL_HPP_
#define POOLCLR_MODEL_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "poolclr/terms.hpp"

namespace poolclr {

// One subject row. Covariate values are stored aligned to the owning
// cohort's covariate_names; all values are finite reals (0/1 indicators for
// binary covariates).
struct Subject {
  std::string subject_id;
  std::string stratum_id;
  std::string node_id;
  int outcome = 0;  // 1 = case, 0 = control
  std::vector<double> values;
};

// A matched set: exactly one case plus m controls sharing a stratum.
// Subjects keep their input order; the order of controls defines the
// control-arm alignment used when sets are pooled.
struct MatchedSet {
  std::string stratum_id;
  std::vector<Subject> subjects;
  int matching_ratio = 0;

  std::size_t case_index() const;
  const Subject& case_subject() const { return subjects[case_index()]; }
  // Controls in input order (positions 1..m for pooling alignment).
  std::vector<const Subject*> controls() const;
};

struct Cohort {
  std::vector<std::string> covariate_names;
  std::vector<MatchedSet> sets;

  std::size_t n_sets() const { return sets.size(); }
  // The shared matching ratio, or nullopt when sets disagree (mixed-ratio
  // cohorts are valid for fitting but not for pooling).
  std::optional<int> uniform_matching_ratio() const;
  std::size_t covariate_index(const std::string& name) const;
};

// A not-yet-validated subject record, as read from a cohort CSV.
struct RawRow {
  std::string stratum_id;
  std::string node_id;
  std::string subject_id;
  int outcome = 0;
  std::vector<double> values;
};

// Groups rows into matched sets (strata ordered by first appearance,
// subjects in input order) and enforces the cohort invariants: unique
// subject ids, finite values, one case and at least one control per stratum.
// An empty input yields an empty cohort plus a warning rather than an error.
Cohort validate_cohort(const std::vector<std::string>& covariate_names,
                       const std::vector<RawRow>& rows,
                       std::vector<std::string>* warnings = nullptr);

// Per-subject term evaluation: transforms are applied to this subject's
// covariates only, before any aggregation ever happens.
double evaluate_term(const Cohort& cohort, const Subject& subject,
                     const TermSpec& term);

}  // namespace poolclr

#endif  // POOLCLR_MODEL_HPP_
