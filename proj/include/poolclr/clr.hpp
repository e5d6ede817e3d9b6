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

#ifndef POOLCLR_CLR_HPP_
#define POOLCLR_CLR_HPP_

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "poolclr/design.hpp"

namespace poolclr {

struct FitOptions {
  double tol = 1e-8;        // convergence: max-norm of the score
  int max_iter = 50;
  double ci_level = 0.95;   // two-sided Wald confidence level
};

struct FitResult {
  std::vector<std::string> term_names;
  Eigen::VectorXd beta;          // log odds ratio scale
  Eigen::MatrixXd cov;           // inverse negative Hessian at the optimum
  Eigen::VectorXd se;
  Eigen::VectorXd ci_lo;         // log scale
  Eigen::VectorXd ci_hi;
  double ci_level = 0.95;
  double log_lik = 0.0;
  double aic = 0.0;
  std::size_t n_strata = 0;
  int iterations = 0;
  bool converged = false;
  double gradient_norm = 0.0;    // max-norm of the score at exit
};

struct LrTestResult {
  double stat = 0.0;
  int df = 0;
  double p_value = 1.0;
};

// Conditional log-likelihood
//   l(beta) = sum over strata of [beta'x_case - ln sum_j exp(beta'x_j)],
// evaluated with a log-sum-exp formulation stable for |beta'x| up to ~700.
double log_likelihood(const ConditionalDesign& design,
                      const Eigen::VectorXd& beta);

// Analytic gradient: per stratum, x_case - sum_j w_j x_j with softmax
// weights w_j over the stratum's rows.
Eigen::VectorXd score(const ConditionalDesign& design,
                      const Eigen::VectorXd& beta);

// Analytic Hessian: negative semidefinite for every beta (the conditional
// log-likelihood is concave).
Eigen::MatrixXd hessian(const ConditionalDesign& design,
                        const Eigen::VectorXd& beta);

// Newton-Raphson from beta = 0 with step-halving. Aliased columns (zero
// within-stratum variance everywhere) are rejected up front; iterates
// passing |beta_j| > 30 raise SeparationDetected. A fit that exhausts
// max_iter is returned with converged = false rather than thrown.
FitResult fit(const ConditionalDesign& design, const FitOptions& opts = {});

// Likelihood-ratio test of a nested pair fitted on the same strata.
LrTestResult lr_test(const FitResult& full, const ConditionalDesign& full_design,
                     const FitResult& reduced,
                     const ConditionalDesign& reduced_design);

// Upper-tail standard normal quantile used for Wald intervals.
double normal_quantile(double prob);

}  // namespace poolclr

#endif  // POOLCLR_CLR_HPP_
