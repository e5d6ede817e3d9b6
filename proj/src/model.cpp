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

#include "poolclr/model.hpp"

#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "poolclr/errors.hpp"

namespace poolclr {

std::size_t MatchedSet::case_index() const {
  for (std::size_t i = 0; i < subjects.size(); ++i) {
    if (subjects[i].outcome == 1) return i;
  }
  throw Error(Errc::kStratumWithoutCase,
              "stratum " + stratum_id + " has no case");
}

std::vector<const Subject*> MatchedSet::controls() const {
  std::vector<const Subject*> out;
  out.reserve(subjects.size() - 1);
  for (const Subject& s : subjects) {
    if (s.outcome == 0) out.push_back(&s);
  }
  return out;
}

std::optional<int> Cohort::uniform_matching_ratio() const {
  std::optional<int> ratio;
  for (const MatchedSet& set : sets) {
    if (!ratio) {
      ratio = set.matching_ratio;
    } else if (*ratio != set.matching_ratio) {
      return std::nullopt;
    }
  }
  return ratio;
}

std::size_t Cohort::covariate_index(const std::string& name) const {
  for (std::size_t i = 0; i < covariate_names.size(); ++i) {
    if (covariate_names[i] == name) return i;
  }
  throw Error(Errc::kUnknownVariable, "no covariate named '" + name + "'");
}

Cohort validate_cohort(const std::vector<std::string>& covariate_names,
                       const std::vector<RawRow>& rows,
                       std::vector<std::string>* warnings) {
  Cohort cohort;
  cohort.covariate_names = covariate_names;

  if (rows.empty()) {
    if (warnings) {
      warnings->push_back("cohort is empty: no subject rows supplied");
    }
    return cohort;
  }

  std::unordered_set<std::string> seen_subjects;
  std::unordered_map<std::string, std::size_t> stratum_pos;

  for (const RawRow& row : rows) {
    if (!seen_subjects.insert(row.subject_id).second) {
      throw Error(Errc::kDuplicateSubject,
                  "subject id '" + row.subject_id + "' appears twice");
    }
    if (row.outcome != 0 && row.outcome != 1) {
      throw Error(Errc::kNonFiniteValue,
                  "subject '" + row.subject_id + "' has outcome " +
                      std::to_string(row.outcome) + "; expected 0 or 1");
    }
    if (row.values.size() != covariate_names.size()) {
      throw Error(Errc::kMissingCovariate,
                  "subject '" + row.subject_id + "' carries " +
                      std::to_string(row.values.size()) + " covariates; " +
                      std::to_string(covariate_names.size()) + " expected");
    }
    for (std::size_t i = 0; i < row.values.size(); ++i) {
      if (!std::isfinite(row.values[i])) {
        throw Error(Errc::kNonFiniteValue,
                    "covariate '" + covariate_names[i] + "' of subject '" +
                        row.subject_id + "' is not finite");
      }
    }

    auto [it, inserted] =
        stratum_pos.try_emplace(row.stratum_id, cohort.sets.size());
    if (inserted) {
      cohort.sets.push_back(MatchedSet{row.stratum_id, {}, 0});
    }
    Subject subject;
    subject.subject_id = row.subject_id;
    subject.stratum_id = row.stratum_id;
    subject.node_id = row.node_id;
    subject.outcome = row.outcome;
    subject.values = row.values;
    cohort.sets[it->second].subjects.push_back(std::move(subject));
  }

  for (MatchedSet& set : cohort.sets) {
    int cases = 0;
    for (const Subject& s : set.subjects) cases += s.outcome;
    if (cases == 0) {
      throw Error(Errc::kStratumWithoutCase,
                  "stratum " + set.stratum_id + " has no case");
    }
    if (cases > 1) {
      throw Error(Errc::kStratumWithMultipleCases,
                  "stratum " + set.stratum_id + " has " +
                      std::to_string(cases) + " cases");
    }
    set.matching_ratio = static_cast<int>(set.subjects.size()) - 1;
    if (set.matching_ratio < 1) {
      throw Error(Errc::kStratumWithoutControl,
                  "stratum " + set.stratum_id + " has no control");
    }
  }

  return cohort;
}

double evaluate_term(const Cohort& cohort, const Subject& subject,
                     const TermSpec& term) {
  double value =
      evaluate_factor(term.first,
                      subject.values[cohort.covariate_index(term.first.name)]);
  if (term.second) {
    value *= evaluate_factor(
        *term.second,
        subject.values[cohort.covariate_index(term.second->name)]);
  }
  return value;
}

}  // namespace poolclr
