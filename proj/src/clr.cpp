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

#include "poolclr/clr.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <unordered_set>

#include "poolclr/csv.hpp"
#include "poolclr/errors.hpp"

namespace poolclr {
namespace {

constexpr double kAliasTol = 1e-12;
constexpr double kSeparationBound = 30.0;
constexpr int kMaxHalvings = 10;

void check_dimensions(const ConditionalDesign& design,
                      const Eigen::VectorXd& beta) {
  const auto p = static_cast<Eigen::Index>(design.n_params());
  if (beta.size() != p) {
    throw Error(Errc::kDimensionMismatch,
                "beta has " + std::to_string(beta.size()) + " entries; " +
                    std::to_string(p) + " terms in the design");
  }
  for (const DesignStratum& stratum : design.strata) {
    if (stratum.x.cols() != p) {
      throw Error(Errc::kDimensionMismatch,
                  "stratum " + stratum.key + " has " +
                      std::to_string(stratum.x.cols()) + " columns; " +
                      std::to_string(p) + " expected");
    }
    if (stratum.x.rows() < 2) {
      throw Error(Errc::kDimensionMismatch,
                  "stratum " + stratum.key + " has fewer than two rows");
    }
  }
}

// Softmax weights over one stratum's linear predictors, max-shifted so the
// exponentials stay finite for |eta| up to ~700.
Eigen::VectorXd stratum_weights(const Eigen::MatrixXd& x,
                                const Eigen::VectorXd& beta) {
  Eigen::VectorXd eta = x * beta;
  Eigen::VectorXd w = (eta.array() - eta.maxCoeff()).exp();
  return w / w.sum();
}

void check_aliasing(const ConditionalDesign& design) {
  for (std::size_t j = 0; j < design.n_params(); ++j) {
    bool varies = false;
    for (const DesignStratum& stratum : design.strata) {
      const auto col = stratum.x.col(static_cast<Eigen::Index>(j));
      const double mean = col.mean();
      if ((col.array() - mean).abs().maxCoeff() > kAliasTol) {
        varies = true;
        break;
      }
    }
    if (!varies) {
      throw Error(Errc::kAliasedCovariate,
                  "term '" + design.term_names[j] +
                      "' has zero within-stratum variance in every stratum");
    }
  }
}

void check_separation(const ConditionalDesign& design,
                      const Eigen::VectorXd& beta) {
  Eigen::Index worst = 0;
  const double mag = beta.cwiseAbs().maxCoeff(&worst);
  if (mag > kSeparationBound) {
    throw Error(Errc::kSeparationDetected,
                "estimate for term '" +
                    design.term_names[static_cast<std::size_t>(worst)] +
                    "' exceeded " + format_double(kSeparationBound) +
                    " in magnitude; the likelihood is monotone");
  }
}

}  // namespace

double log_likelihood(const ConditionalDesign& design,
                      const Eigen::VectorXd& beta) {
  check_dimensions(design, beta);
  double total = 0.0;
  for (const DesignStratum& stratum : design.strata) {
    Eigen::VectorXd eta = stratum.x * beta;
    const double shift = eta.maxCoeff();
    total += eta(0) - shift - std::log((eta.array() - shift).exp().sum());
  }
  return total;
}

Eigen::VectorXd score(const ConditionalDesign& design,
                      const Eigen::VectorXd& beta) {
  check_dimensions(design, beta);
  Eigen::VectorXd s = Eigen::VectorXd::Zero(beta.size());
  for (const DesignStratum& stratum : design.strata) {
    const Eigen::VectorXd w = stratum_weights(stratum.x, beta);
    s += stratum.x.row(0).transpose() - stratum.x.transpose() * w;
  }
  return s;
}

Eigen::MatrixXd hessian(const ConditionalDesign& design,
                        const Eigen::VectorXd& beta) {
  check_dimensions(design, beta);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(beta.size(), beta.size());
  for (const DesignStratum& stratum : design.strata) {
    const Eigen::VectorXd w = stratum_weights(stratum.x, beta);
    const Eigen::VectorXd xbar = stratum.x.transpose() * w;
    h -= stratum.x.transpose() * w.asDiagonal() * stratum.x -
         xbar * xbar.transpose();
  }
  return h;
}

FitResult fit(const ConditionalDesign& design, const FitOptions& opts) {
  if (design.strata.empty()) {
    throw Error(Errc::kConfigError, "design has no strata to fit");
  }
  if (design.n_params() == 0) {
    throw Error(Errc::kConfigError, "design has no terms to fit");
  }
  const auto p = static_cast<Eigen::Index>(design.n_params());
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  check_dimensions(design, beta);
  check_aliasing(design);

  double ll = log_likelihood(design, beta);
  Eigen::VectorXd grad = score(design, beta);
  double grad_norm = grad.cwiseAbs().maxCoeff();

  int iterations = 0;
  while (grad_norm >= opts.tol && iterations < opts.max_iter) {
    Eigen::MatrixXd neg_hessian = -hessian(design, beta);
    Eigen::LLT<Eigen::MatrixXd> llt(neg_hessian);
    if (llt.info() != Eigen::Success) {
      throw Error(Errc::kSingularHessian,
                  "negative Hessian is not positive definite at iteration " +
                      std::to_string(iterations + 1));
    }
    const Eigen::VectorXd direction = llt.solve(grad);
    if (!direction.allFinite()) {
      throw Error(Errc::kSingularHessian,
                  "Newton direction is not finite at iteration " +
                      std::to_string(iterations + 1));
    }

    double step = 1.0;
    Eigen::VectorXd candidate = beta + step * direction;
    double candidate_ll = log_likelihood(design, candidate);
    for (int halvings = 0;
         halvings < kMaxHalvings && !(candidate_ll > ll); ++halvings) {
      step *= 0.5;
      candidate = beta + step * direction;
      candidate_ll = log_likelihood(design, candidate);
    }
    beta = std::move(candidate);
    ll = candidate_ll;
    ++iterations;

    check_separation(design, beta);
    grad = score(design, beta);
    grad_norm = grad.cwiseAbs().maxCoeff();
  }

  FitResult result;
  result.term_names = design.term_names;
  result.beta = beta;
  result.ci_level = opts.ci_level;
  result.log_lik = ll;
  result.aic = -2.0 * ll + 2.0 * static_cast<double>(p);
  result.n_strata = design.n_strata();
  result.iterations = iterations;
  result.converged = grad_norm < opts.tol;
  result.gradient_norm = grad_norm;

  Eigen::MatrixXd neg_hessian = -hessian(design, beta);
  Eigen::LLT<Eigen::MatrixXd> llt(neg_hessian);
  if (llt.info() != Eigen::Success) {
    throw Error(Errc::kSingularHessian,
                "negative Hessian is not positive definite at the solution");
  }
  result.cov = llt.solve(Eigen::MatrixXd::Identity(p, p));
  if (!result.cov.allFinite()) {
    throw Error(Errc::kSingularHessian,
                "covariance solve produced non-finite entries");
  }
  result.se = result.cov.diagonal().cwiseMax(0.0).cwiseSqrt();

  const double z = normal_quantile(1.0 - (1.0 - opts.ci_level) / 2.0);
  result.ci_lo = result.beta - z * result.se;
  result.ci_hi = result.beta + z * result.se;
  return result;
}

LrTestResult lr_test(const FitResult& full,
                     const ConditionalDesign& full_design,
                     const FitResult& reduced,
                     const ConditionalDesign& reduced_design) {
  std::unordered_set<std::string> full_terms(full.term_names.begin(),
                                             full.term_names.end());
  for (const std::string& term : reduced.term_names) {
    if (full_terms.count(term) == 0) {
      throw Error(Errc::kNotNested,
                  "reduced model term '" + term + "' is not in the full model");
    }
  }
  if (reduced.term_names.size() > full.term_names.size()) {
    throw Error(Errc::kNotNested,
                "reduced model has more terms than the full model");
  }
  if (full_design.n_strata() != reduced_design.n_strata()) {
    throw Error(Errc::kStrataMismatch,
                "models were fitted on different numbers of strata");
  }
  for (std::size_t i = 0; i < full_design.strata.size(); ++i) {
    if (full_design.strata[i].key != reduced_design.strata[i].key) {
      throw Error(Errc::kStrataMismatch,
                  "models were fitted on different strata: '" +
                      full_design.strata[i].key + "' vs '" +
                      reduced_design.strata[i].key + "'");
    }
  }

  LrTestResult out;
  out.stat = std::max(0.0, 2.0 * (full.log_lik - reduced.log_lik));
  out.df = static_cast<int>(full.term_names.size()) -
           static_cast<int>(reduced.term_names.size());
  if (out.df == 0) {
    out.p_value = out.stat > 0.0 ? 0.0 : 1.0;
  } else {
    boost::math::chi_squared dist(out.df);
    out.p_value = boost::math::cdf(boost::math::complement(dist, out.stat));
  }
  return out;
}

double normal_quantile(double prob) {
  boost::math::normal dist;
  return boost::math::quantile(dist, prob);
}

}  // namespace poolclr
