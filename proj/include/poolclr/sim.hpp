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

#ifndef POOLCLR_SIM_HPP_
#define POOLCLR_SIM_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "poolclr/model.hpp"

namespace poolclr {

// How a stratum's single case arises from its m+1 simulated subjects.
//
// kBernoulliRejection draws each subject's outcome from the logistic model
// (with the stratum intercept alpha) and redraws the whole stratum until
// exactly one case appears; the accepted strata are the population of
// matched sets. kConditional keeps covariates at their population
// distribution and picks the case index with probability proportional to
// exp(eta), the conditional one-case-per-stratum law (alpha cancels).
// Rejection is the default: it reproduces the reference pooled-bias pattern
// at large pool sizes, where the conditional shortcut understates both bias
// and spread.
enum class CaseDraw { kBernoulliRejection, kConditional };

struct SimParams {
  int n_sets = 1020;
  int m = 10;  // controls per case
  int reps = 500;
  // True log odds ratios: eta = alpha + beta U + gamma X + delta Z1
  //                              + omega Z2 + theta U Z2.
  double beta = 0.3;
  double gamma = 0.2;
  double delta = 0.15;
  double omega = 0.09;
  double theta = 0.05;
  double x_prevalence = 0.4;
  double z1_logu_corr = 0.35;
  double alpha_mean = -3.0;
  double alpha_sd = 2.0;
  std::vector<int> poolsizes = {4, 6, 10};
  std::uint64_t seed = 0;
  CaseDraw case_draw = CaseDraw::kBernoulliRejection;

  std::vector<double> truth() const {
    return {beta, gamma, delta, omega, theta};
  }
};

// Throws ConfigError on out-of-range parameters.
void validate_params(const SimParams& params);

// Model terms fitted in every analysis: U, X, Z1, Z2, U:Z2 (the effect
// modifier enters as an ordinary interaction term; pooling is never
// stratified on it).
std::vector<TermSpec> sim_terms();

// One simulated cohort, deterministic per (params.seed, rep). Subjects are
// listed in draw order, so the case position within a stratum is random.
// RNG streams are split per (seed, rep, stratum): concurrent generation
// cannot perturb reproducibility.
Cohort generate_cohort(const SimParams& params, int rep);

struct ParamSummary {
  std::string name;        // beta, gamma, delta, omega, theta
  std::string term;        // U, X, Z1, Z2, U:Z2
  double truth = 0.0;
  double mean_estimate = 0.0;
  double mcse = 0.0;       // sd of estimates across converged reps
  double model_se = 0.0;   // mean of model-based SEs
  double coverage = 0.0;   // fraction of 95% Wald CIs containing truth
};

struct RepEstimate {
  bool ok = false;
  std::string error;             // failure reason when !ok
  std::vector<double> estimate;  // per parameter
  std::vector<double> se;
};

struct AnalysisSummary {
  std::string label;   // "unpooled" or "g=4" etc.
  int pool_size = 0;   // 0 for unpooled
  int n_pools = 0;     // strata entering the fit
  int converged_reps = 0;
  int failed_reps = 0;
  std::vector<ParamSummary> params;
  std::vector<RepEstimate> per_rep;
};

struct SimulationReport {
  SimParams params;
  std::vector<AnalysisSummary> analyses;
};

// The full Monte Carlo: per rep, generate a cohort, fit it unpooled, then
// pool with every configured g (drop-remainder) and fit the aggregates.
// Reps run concurrently across n_threads (0 = hardware concurrency); the
// accumulator merges per-rep results in rep order, so the report is
// reproducible bit-for-bit from (params, seed) on one platform. Per-rep fit
// failures are tallied and excluded from the summaries without aborting.
SimulationReport run_monte_carlo(const SimParams& params, int n_threads = 0);

// Paired per-rep estimates for external plotting: CSV columns
// rep,parameter,truth,unpooled,pooled with one row per (rep, parameter),
// restricted to reps where both fits converged.
void scatter_export(const SimulationReport& report, int pool_size,
                    std::ostream& out);

}  // namespace poolclr

#endif  // POOLCLR_SIM_HPP_
