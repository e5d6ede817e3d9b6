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

#ifndef POOLCLR_REPORT_HPP_
#define POOLCLR_REPORT_HPP_

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "poolclr/clr.hpp"
#include "poolclr/sim.hpp"

namespace poolclr {

// {terms, estimate, se, or, ci_lo, ci_hi, loglik, aic, converged,
//  iterations, n_strata, gradient_norm, ci_level}; odds ratios and their
// interval endpoints are on the exponentiated scale.
nlohmann::json fit_result_to_json(const FitResult& result);
FitResult fit_result_from_json(const nlohmann::json& j);

nlohmann::json sim_report_to_json(const SimulationReport& report);
SimulationReport sim_report_from_json(const nlohmann::json& j);

// One fit as an aligned text table: per term, the estimate, SE, odds ratio
// and confidence interval, with likelihood diagnostics underneath.
std::string render_fit_table(const FitResult& result);

// Several fits side by side, one OR (lo, hi) column per label.
std::string render_fit_comparison(const std::vector<std::string>& labels,
                                  const std::vector<FitResult>& fits,
                                  bool markdown = false);

// Per-parameter rows of estimate/MCSE/ModelSE/coverage with one column per
// analysis (unpooled and each pool size).
std::string render_sim_table(const SimulationReport& report,
                             bool markdown = false);

}  // namespace poolclr

#endif  // POOLCLR_REPORT_HPP_
