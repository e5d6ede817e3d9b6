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

#ifndef POOLCLR_DESIGN_HPP_
#define POOLCLR_DESIGN_HPP_

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "poolclr/model.hpp"
#include "poolclr/terms.hpp"

namespace poolclr {

// One conditioned stratum of the likelihood. Row 0 is the case row; rows
// 1..m are control rows in their alignment order. Strata may have different
// numbers of control rows.
struct DesignStratum {
  std::string key;
  Eigen::MatrixXd x;  // (1 + controls) x p
};

// The fitter's sole input. The same shape carries individual-level strata
// and pooled strata: a pool contributes one case row (sum over its member
// cases) and one row per control position.
struct ConditionalDesign {
  std::vector<std::string> term_names;
  std::vector<DesignStratum> strata;

  std::size_t n_params() const { return term_names.size(); }
  std::size_t n_strata() const { return strata.size(); }
};

// Evaluates the terms on every subject of the cohort. The case subject maps
// to row 0 regardless of its input position; control rows keep input order.
ConditionalDesign build_design(const Cohort& cohort,
                               const std::vector<TermSpec>& terms);

}  // namespace poolclr

#endif  // POOLCLR_DESIGN_HPP_
