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

#include "poolclr/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "poolclr/errors.hpp"

namespace poolclr {
namespace {

std::string fixed(double value, int precision) {
  if (std::isnan(value)) return "-";
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.*f", precision, value);
  return buffer;
}

std::string pad(const std::string& text, std::size_t width) {
  if (text.size() >= width) return text;
  return text + std::string(width - text.size(), ' ');
}

std::string or_with_ci(double or_value, double lo, double hi) {
  return fixed(or_value, 2) + " (" + fixed(lo, 2) + ", " + fixed(hi, 2) + ")";
}

std::vector<double> to_vector(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd from_vector(const std::vector<double>& v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = v[i];
  }
  return out;
}

const char* case_draw_name(CaseDraw draw) {
  return draw == CaseDraw::kBernoulliRejection ? "bernoulli-rejection"
                                               : "conditional";
}

CaseDraw parse_case_draw(const std::string& name) {
  if (name == "bernoulli-rejection") return CaseDraw::kBernoulliRejection;
  if (name == "conditional") return CaseDraw::kConditional;
  throw Error(Errc::kConfigError, "unknown case-draw mode '" + name + "'");
}

}  // namespace

nlohmann::json fit_result_to_json(const FitResult& result) {
  nlohmann::json j;
  j["terms"] = result.term_names;
  j["estimate"] = to_vector(result.beta);
  j["se"] = to_vector(result.se);
  j["or"] = to_vector(result.beta.array().exp().matrix());
  j["ci_lo"] = to_vector(result.ci_lo.array().exp().matrix());
  j["ci_hi"] = to_vector(result.ci_hi.array().exp().matrix());
  j["ci_level"] = result.ci_level;
  j["loglik"] = result.log_lik;
  j["aic"] = result.aic;
  j["n_strata"] = result.n_strata;
  j["iterations"] = result.iterations;
  j["converged"] = result.converged;
  j["gradient_norm"] = result.gradient_norm;
  return j;
}

FitResult fit_result_from_json(const nlohmann::json& j) {
  FitResult result;
  result.term_names = j.at("terms").get<std::vector<std::string>>();
  result.beta = from_vector(j.at("estimate").get<std::vector<double>>());
  result.se = from_vector(j.at("se").get<std::vector<double>>());
  const auto ci_lo = j.at("ci_lo").get<std::vector<double>>();
  const auto ci_hi = j.at("ci_hi").get<std::vector<double>>();
  result.ci_lo.resize(static_cast<Eigen::Index>(ci_lo.size()));
  result.ci_hi.resize(static_cast<Eigen::Index>(ci_hi.size()));
  for (std::size_t i = 0; i < ci_lo.size(); ++i) {
    result.ci_lo(static_cast<Eigen::Index>(i)) = std::log(ci_lo[i]);
    result.ci_hi(static_cast<Eigen::Index>(i)) = std::log(ci_hi[i]);
  }
  // The covariance matrix does not survive serialization; rebuild the
  // diagonal so se stays self-consistent.
  result.cov = result.se.array().square().matrix().asDiagonal();
  result.ci_level = j.value("ci_level", 0.95);
  result.log_lik = j.at("loglik").get<double>();
  result.aic = j.at("aic").get<double>();
  result.n_strata = j.value("n_strata", std::size_t{0});
  result.iterations = j.value("iterations", 0);
  result.converged = j.value("converged", false);
  result.gradient_norm = j.value("gradient_norm", 0.0);
  return result;
}

nlohmann::json sim_report_to_json(const SimulationReport& report) {
  const SimParams& p = report.params;
  nlohmann::json params{{"sets", p.n_sets},
                        {"controls", p.m},
                        {"reps", p.reps},
                        {"beta", p.beta},
                        {"gamma", p.gamma},
                        {"delta", p.delta},
                        {"omega", p.omega},
                        {"theta", p.theta},
                        {"x_prevalence", p.x_prevalence},
                        {"z1_logu_corr", p.z1_logu_corr},
                        {"alpha_mean", p.alpha_mean},
                        {"alpha_sd", p.alpha_sd},
                        {"pool_sizes", p.poolsizes},
                        {"seed", p.seed},
                        {"case_draw", case_draw_name(p.case_draw)}};

  nlohmann::json analyses = nlohmann::json::array();
  for (const AnalysisSummary& analysis : report.analyses) {
    nlohmann::json rows = nlohmann::json::array();
    for (const ParamSummary& param : analysis.params) {
      rows.push_back({{"name", param.name},
                      {"term", param.term},
                      {"truth", param.truth},
                      {"mean_estimate", param.mean_estimate},
                      {"mcse", param.mcse},
                      {"model_se", param.model_se},
                      {"coverage", param.coverage}});
    }
    nlohmann::json per_rep = nlohmann::json::array();
    for (const RepEstimate& estimate : analysis.per_rep) {
      per_rep.push_back({{"ok", estimate.ok},
                         {"error", estimate.error},
                         {"estimate", estimate.estimate},
                         {"se", estimate.se}});
    }
    analyses.push_back({{"label", analysis.label},
                        {"pool_size", analysis.pool_size},
                        {"n_pools", analysis.n_pools},
                        {"converged_reps", analysis.converged_reps},
                        {"failed_reps", analysis.failed_reps},
                        {"params", std::move(rows)},
                        {"per_rep", std::move(per_rep)}});
  }
  return nlohmann::json{{"params", std::move(params)},
                        {"analyses", std::move(analyses)}};
}

SimulationReport sim_report_from_json(const nlohmann::json& j) {
  SimulationReport report;
  const nlohmann::json& params = j.at("params");
  report.params.n_sets = params.value("sets", 1020);
  report.params.m = params.value("controls", 10);
  report.params.reps = params.value("reps", 500);
  report.params.beta = params.value("beta", 0.3);
  report.params.gamma = params.value("gamma", 0.2);
  report.params.delta = params.value("delta", 0.15);
  report.params.omega = params.value("omega", 0.09);
  report.params.theta = params.value("theta", 0.05);
  report.params.x_prevalence = params.value("x_prevalence", 0.4);
  report.params.z1_logu_corr = params.value("z1_logu_corr", 0.35);
  report.params.alpha_mean = params.value("alpha_mean", -3.0);
  report.params.alpha_sd = params.value("alpha_sd", 2.0);
  report.params.poolsizes =
      params.value("pool_sizes", std::vector<int>{4, 6, 10});
  report.params.seed = params.value("seed", std::uint64_t{0});
  report.params.case_draw =
      parse_case_draw(params.value("case_draw", "bernoulli-rejection"));

  for (const nlohmann::json& a : j.at("analyses")) {
    AnalysisSummary analysis;
    analysis.label = a.value("label", "");
    analysis.pool_size = a.value("pool_size", 0);
    analysis.n_pools = a.value("n_pools", 0);
    analysis.converged_reps = a.value("converged_reps", 0);
    analysis.failed_reps = a.value("failed_reps", 0);
    for (const nlohmann::json& r : a.value("params", nlohmann::json::array())) {
      ParamSummary param;
      param.name = r.value("name", "");
      param.term = r.value("term", "");
      param.truth = r.value("truth", 0.0);
      param.mean_estimate = r.value("mean_estimate", 0.0);
      param.mcse = r.at("mcse").is_null()
                       ? std::numeric_limits<double>::quiet_NaN()
                       : r.value("mcse", 0.0);
      param.model_se = r.value("model_se", 0.0);
      param.coverage = r.value("coverage", 0.0);
      analysis.params.push_back(std::move(param));
    }
    for (const nlohmann::json& r : a.value("per_rep",
                                           nlohmann::json::array())) {
      RepEstimate estimate;
      estimate.ok = r.value("ok", false);
      estimate.error = r.value("error", "");
      estimate.estimate = r.value("estimate", std::vector<double>{});
      estimate.se = r.value("se", std::vector<double>{});
      analysis.per_rep.push_back(std::move(estimate));
    }
    report.analyses.push_back(std::move(analysis));
  }
  return report;
}

std::string render_fit_table(const FitResult& result) {
  std::size_t term_width = 4;
  for (const std::string& term : result.term_names) {
    term_width = std::max(term_width, term.size());
  }

  std::ostringstream out;
  out << pad("term", term_width + 2) << pad("estimate", 10) << pad("SE", 10)
      << pad("OR", 8);
  out << fixed(result.ci_level * 100.0, 0) << "% CI\n";
  for (std::size_t i = 0; i < result.term_names.size(); ++i) {
    const auto idx = static_cast<Eigen::Index>(i);
    out << pad(result.term_names[i], term_width + 2)
        << pad(fixed(result.beta(idx), 4), 10)
        << pad(fixed(result.se(idx), 4), 10)
        << pad(fixed(std::exp(result.beta(idx)), 2), 8) << "("
        << fixed(std::exp(result.ci_lo(idx)), 2) << ", "
        << fixed(std::exp(result.ci_hi(idx)), 2) << ")\n";
  }
  out << "log-likelihood " << fixed(result.log_lik, 3) << "  AIC "
      << fixed(result.aic, 2) << "  strata " << result.n_strata
      << "  iterations " << result.iterations << "  converged "
      << (result.converged ? "yes" : "no") << "\n";
  return out.str();
}

std::string render_fit_comparison(const std::vector<std::string>& labels,
                                  const std::vector<FitResult>& fits,
                                  bool markdown) {
  if (labels.size() != fits.size()) {
    throw Error(Errc::kConfigError,
                "comparison needs one label per fit result");
  }
  if (fits.empty()) {
    throw Error(Errc::kConfigError, "comparison needs at least one fit");
  }

  const std::vector<std::string>& terms = fits.front().term_names;
  std::size_t term_width = 4;
  for (const std::string& term : terms) {
    term_width = std::max(term_width, term.size());
  }
  constexpr std::size_t kCell = 22;

  std::ostringstream out;
  if (markdown) {
    out << "| term |";
    for (const std::string& label : labels) out << ' ' << label << " |";
    out << "\n|---|";
    for (std::size_t i = 0; i < labels.size(); ++i) out << "---|";
    out << '\n';
  } else {
    out << pad("term", term_width + 2);
    for (const std::string& label : labels) out << pad(label, kCell);
    out << '\n';
  }

  for (std::size_t t = 0; t < terms.size(); ++t) {
    if (markdown) {
      out << "| " << terms[t] << " |";
    } else {
      out << pad(terms[t], term_width + 2);
    }
    for (const FitResult& fit : fits) {
      std::string cell = "-";
      for (std::size_t i = 0; i < fit.term_names.size(); ++i) {
        if (fit.term_names[i] == terms[t]) {
          const auto idx = static_cast<Eigen::Index>(i);
          cell = or_with_ci(std::exp(fit.beta(idx)),
                            std::exp(fit.ci_lo(idx)),
                            std::exp(fit.ci_hi(idx)));
          break;
        }
      }
      if (markdown) {
        out << ' ' << cell << " |";
      } else {
        out << pad(cell, kCell);
      }
    }
    out << '\n';
  }
  return out.str();
}

std::string render_sim_table(const SimulationReport& report, bool markdown) {
  static const char* const kMetrics[] = {"estimate", "MCSE", "ModelSE",
                                         "coverage"};
  constexpr std::size_t kCell = 10;

  std::ostringstream out;
  if (markdown) {
    out << "| parameter | truth | metric |";
    for (const AnalysisSummary& analysis : report.analyses) {
      out << ' ' << analysis.label << " |";
    }
    out << "\n|---|---|---|";
    for (std::size_t i = 0; i < report.analyses.size(); ++i) out << "---|";
    out << '\n';
  } else {
    out << pad("parameter", 11) << pad("truth", 8) << pad("metric", 10);
    for (const AnalysisSummary& analysis : report.analyses) {
      out << pad(analysis.label, kCell);
    }
    out << '\n';
  }

  if (report.analyses.empty()) return out.str();
  const std::size_t n_params = report.analyses.front().params.size();
  for (std::size_t p = 0; p < n_params; ++p) {
    for (std::size_t metric = 0; metric < 4; ++metric) {
      const ParamSummary& lead = report.analyses.front().params[p];
      const std::string name = metric == 0 ? lead.name : "";
      const std::string truth = metric == 0 ? fixed(lead.truth, 2) : "";
      if (markdown) {
        out << "| " << name << " | " << truth << " | " << kMetrics[metric]
            << " |";
      } else {
        out << pad(name, 11) << pad(truth, 8) << pad(kMetrics[metric], 10);
      }
      for (const AnalysisSummary& analysis : report.analyses) {
        double value = std::numeric_limits<double>::quiet_NaN();
        if (p < analysis.params.size()) {
          const ParamSummary& param = analysis.params[p];
          value = metric == 0   ? param.mean_estimate
                  : metric == 1 ? param.mcse
                  : metric == 2 ? param.model_se
                                : param.coverage;
        }
        if (markdown) {
          out << ' ' << fixed(value, 3) << " |";
        } else {
          out << pad(fixed(value, 3), kCell);
        }
      }
      out << '\n';
    }
  }

  int total_failures = 0;
  for (const AnalysisSummary& analysis : report.analyses) {
    total_failures += analysis.failed_reps;
  }
  if (!markdown) {
    out << "reps " << report.params.reps << "  seed " << report.params.seed
        << "  failed fits " << total_failures << '\n';
  }
  return out.str();
}

}  // namespace poolclr
