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

#include "poolclr/design.hpp"

#include "poolclr/errors.hpp"

namespace poolclr {

ConditionalDesign build_design(const Cohort& cohort,
                               const std::vector<TermSpec>& terms) {
  if (terms.empty()) {
    throw Error(Errc::kConfigError, "no model terms supplied");
  }
  ConditionalDesign design;
  design.term_names.reserve(terms.size());
  for (const TermSpec& term : terms) {
    design.term_names.push_back(render_term(term));
  }

  design.strata.reserve(cohort.sets.size());
  for (const MatchedSet& set : cohort.sets) {
    DesignStratum stratum;
    stratum.key = set.stratum_id;
    stratum.x.resize(static_cast<Eigen::Index>(set.subjects.size()),
                     static_cast<Eigen::Index>(terms.size()));
    Eigen::Index row = 1;
    for (const Subject& subject : set.subjects) {
      const Eigen::Index r = subject.outcome == 1 ? 0 : row++;
      for (std::size_t c = 0; c < terms.size(); ++c) {
        stratum.x(r, static_cast<Eigen::Index>(c)) =
            evaluate_term(cohort, subject, terms[c]);
      }
    }
    design.strata.push_back(std::move(stratum));
  }
  return design;
}

}  // namespace poolclr
