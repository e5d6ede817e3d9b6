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

#include "poolclr/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <thread>

#include "poolclr/clr.hpp"
#include "poolclr/csv.hpp"
#include "poolclr/design.hpp"
#include "poolclr/errors.hpp"
#include "poolclr/pooling.hpp"
#include "poolclr/rng.hpp"

namespace poolclr {
namespace {

// Stream tags keeping cohort generation and pooling assignments on disjoint
// RNG streams for any (seed, rep).
constexpr std::uint64_t kCohortStreamTag = 0x636f686fULL;
constexpr std::uint64_t kPoolStreamTag = 0x706f6f6cULL;

constexpr int kMaxAttemptsPerStratum = 100000;

const char* const kParamNames[] = {"beta", "gamma", "delta", "omega", "theta"};
const char* const kTermNames[] = {"U", "X", "Z1", "Z2", "U:Z2"};

double uniform01(std::mt19937_64& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

double std_normal(std::mt19937_64& engine) {
  double u1 = uniform01(engine);
  while (u1 == 0.0) u1 = uniform01(engine);
  const double u2 = uniform01(engine);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * 3.14159265358979323846 * u2);
}

struct SimSubject {
  double u = 0.0;
  double x = 0.0;
  double z1 = 0.0;
  double z2 = 0.0;
  double eta_no_alpha = 0.0;
};

SimSubject draw_subject(const SimParams& p, std::mt19937_64& engine) {
  SimSubject s;
  const double n1 = std_normal(engine);
  const double n2 = std_normal(engine);
  const double log_u = n1;
  s.z1 = p.z1_logu_corr * n1 +
         std::sqrt(1.0 - p.z1_logu_corr * p.z1_logu_corr) * n2;
  s.u = std::exp(log_u);
  s.x = uniform01(engine) < p.x_prevalence ? 1.0 : 0.0;
  s.z2 = std_normal(engine);
  s.eta_no_alpha = p.beta * s.u + p.gamma * s.x + p.delta * s.z1 +
                   p.omega * s.z2 + p.theta * s.u * s.z2;
  return s;
}

// One matched set under rejection sampling: redraw the stratum intercept and
// all m+1 subjects until the Bernoulli outcomes produce exactly one case.
std::vector<SimSubject> draw_stratum_rejection(const SimParams& p,
                                               std::mt19937_64& engine,
                                               int stratum,
                                               std::size_t* case_pos) {
  const std::size_t n = static_cast<std::size_t>(p.m) + 1;
  std::vector<SimSubject> subjects(n);
  std::vector<double> eta(n);
  for (int attempt = 0; attempt < kMaxAttemptsPerStratum; ++attempt) {
    const double alpha = p.alpha_mean + p.alpha_sd * std_normal(engine);
    for (std::size_t j = 0; j < n; ++j) {
      subjects[j] = draw_subject(p, engine);
      eta[j] = alpha + subjects[j].eta_no_alpha;
    }
    int cases = 0;
    std::size_t case_at = 0;
    for (std::size_t j = 0; j < n; ++j) {
      const double prob = 1.0 / (1.0 + std::exp(-eta[j]));
      if (uniform01(engine) < prob) {
        ++cases;
        case_at = j;
      }
    }
    if (cases == 1) {
      *case_pos = case_at;
      return subjects;
    }
  }
  throw Error(Errc::kGenerationStalled,
              "stratum " + std::to_string(stratum) + " produced no "
              "exactly-one-case draw in " +
                  std::to_string(kMaxAttemptsPerStratum) + " attempts");
}

// One matched set under the conditional law: covariates stay at their
// population distribution and the case index is drawn proportional to
// exp(eta); the stratum intercept cancels and is never drawn.
std::vector<SimSubject> draw_stratum_conditional(const SimParams& p,
                                                 std::mt19937_64& engine,
                                                 std::size_t* case_pos) {
  const std::size_t n = static_cast<std::size_t>(p.m) + 1;
  std::vector<SimSubject> subjects(n);
  std::vector<double> eta(n);
  double eta_max = -1e300;
  for (std::size_t j = 0; j < n; ++j) {
    subjects[j] = draw_subject(p, engine);
    eta[j] = subjects[j].eta_no_alpha;
    if (eta[j] > eta_max) eta_max = eta[j];
  }
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    eta[j] = std::exp(eta[j] - eta_max);
    total += eta[j];
  }
  const double target = uniform01(engine) * total;
  double running = 0.0;
  std::size_t chosen = n - 1;
  for (std::size_t j = 0; j < n; ++j) {
    running += eta[j];
    if (target < running) {
      chosen = j;
      break;
    }
  }
  *case_pos = chosen;
  return subjects;
}

struct RepRow {
  std::vector<RepEstimate> per_analysis;
};

RepEstimate summarize_fit(const ConditionalDesign& design,
                          const FitOptions& opts) {
  RepEstimate out;
  try {
    const FitResult result = fit(design, opts);
    if (!result.converged) {
      out.error = std::string(errc_name(Errc::kNotConverged)) +
                  ": gradient norm " + std::to_string(result.gradient_norm) +
                  " after " + std::to_string(result.iterations) +
                  " iterations";
      return out;
    }
    out.ok = true;
    out.estimate.assign(result.beta.data(),
                        result.beta.data() + result.beta.size());
    out.se.assign(result.se.data(), result.se.data() + result.se.size());
  } catch (const Error& e) {
    out.error = e.what();
  }
  return out;
}

}  // namespace

void validate_params(const SimParams& params) {
  if (params.n_sets < 1) {
    throw Error(Errc::kConfigError, "n_sets must be at least 1");
  }
  if (params.m < 1) {
    throw Error(Errc::kConfigError, "matching ratio must be at least 1");
  }
  if (params.reps < 1) {
    throw Error(Errc::kConfigError, "rep count must be at least 1");
  }
  if (!(std::abs(params.z1_logu_corr) < 1.0)) {
    throw Error(Errc::kConfigError,
                "correlation between Z1 and log(U) must be inside (-1, 1)");
  }
  if (!(params.x_prevalence > 0.0 && params.x_prevalence < 1.0)) {
    throw Error(Errc::kConfigError, "X prevalence must be inside (0, 1)");
  }
  if (!(params.alpha_sd >= 0.0)) {
    throw Error(Errc::kConfigError, "alpha_sd must be nonnegative");
  }
  for (int g : params.poolsizes) {
    if (g < 1 || g > params.n_sets) {
      throw Error(Errc::kConfigError,
                  "pool size " + std::to_string(g) +
                      " is outside [1, n_sets]");
    }
  }
}

std::vector<TermSpec> sim_terms() {
  std::vector<TermSpec> terms;
  terms.reserve(5);
  for (const char* name : kTermNames) terms.push_back(parse_term_spec(name));
  return terms;
}

Cohort generate_cohort(const SimParams& params, int rep) {
  validate_params(params);
  const std::vector<std::string> covariates = {"U", "X", "Z1", "Z2"};
  std::vector<RawRow> rows;
  rows.reserve(static_cast<std::size_t>(params.n_sets) *
               (static_cast<std::size_t>(params.m) + 1));

  for (int stratum = 1; stratum <= params.n_sets; ++stratum) {
    std::mt19937_64 engine =
        make_engine(params.seed, {kCohortStreamTag,
                                  static_cast<std::uint64_t>(rep),
                                  static_cast<std::uint64_t>(stratum)});
    std::size_t case_pos = 0;
    const std::vector<SimSubject> subjects =
        params.case_draw == CaseDraw::kBernoulliRejection
            ? draw_stratum_rejection(params, engine, stratum, &case_pos)
            : draw_stratum_conditional(params, engine, &case_pos);

    const std::string stratum_id = "s" + std::to_string(stratum);
    for (std::size_t j = 0; j < subjects.size(); ++j) {
      RawRow row;
      row.stratum_id = stratum_id;
      row.node_id = "sim";
      row.subject_id = stratum_id + "-" + std::to_string(j + 1);
      row.outcome = j == case_pos ? 1 : 0;
      row.values = {subjects[j].u, subjects[j].x, subjects[j].z1,
                    subjects[j].z2};
      rows.push_back(std::move(row));
    }
  }
  return validate_cohort(covariates, rows);
}

SimulationReport run_monte_carlo(const SimParams& params, int n_threads) {
  validate_params(params);
  const std::vector<TermSpec> terms = sim_terms();
  const FitOptions fit_opts;

  struct AnalysisSpec {
    std::string label;
    int pool_size = 0;
    PoolPlan plan;
  };
  std::vector<AnalysisSpec> specs;
  specs.push_back(AnalysisSpec{"unpooled", 0, {}});
  for (int g : params.poolsizes) {
    AnalysisSpec spec;
    spec.label = "g=" + std::to_string(g);
    spec.pool_size = g;
    if (g == 1) {
      spec.plan.blocks = {PoolBlock{1, params.n_sets}};
      spec.plan.policy = PoolPolicy::kDropRemainder;
    } else {
      spec.plan = plan_pools(params.n_sets, g, PoolPolicy::kDropRemainder);
    }
    specs.push_back(std::move(spec));
  }

  std::vector<std::vector<RepEstimate>> per_rep(
      specs.size(), std::vector<RepEstimate>(
                        static_cast<std::size_t>(params.reps)));

  auto run_rep = [&](int rep) {
    RepRow row;
    row.per_analysis.resize(specs.size());
    Cohort cohort;
    try {
      cohort = generate_cohort(params, rep);
    } catch (const Error& e) {
      for (auto& estimate : row.per_analysis) estimate.error = e.what();
      return row;
    }
    const ConditionalDesign unpooled = build_design(cohort, terms);
    row.per_analysis[0] = summarize_fit(unpooled, fit_opts);

    for (std::size_t a = 1; a < specs.size(); ++a) {
      try {
        const std::uint64_t pool_seed = stream_seed(
            params.seed, {kPoolStreamTag, static_cast<std::uint64_t>(rep),
                          static_cast<std::uint64_t>(specs[a].pool_size)});
        const PoolAssignment assignment =
            assign_pools(cohort, specs[a].plan, pool_seed);
        const PooledDesign pooled = aggregate(cohort, assignment, terms);
        row.per_analysis[a] = summarize_fit(pooled.design, fit_opts);
      } catch (const Error& e) {
        row.per_analysis[a].error = e.what();
      }
    }
    return row;
  };

  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  const int threads =
      n_threads > 0 ? n_threads : static_cast<int>(hw);
  if (threads <= 1 || params.reps == 1) {
    for (int rep = 1; rep <= params.reps; ++rep) {
      RepRow row = run_rep(rep);
      for (std::size_t a = 0; a < specs.size(); ++a) {
        per_rep[a][static_cast<std::size_t>(rep - 1)] =
            std::move(row.per_analysis[a]);
      }
    }
  } else {
    auto worker = [&](int offset) {
      for (int rep = 1 + offset; rep <= params.reps; rep += threads) {
        RepRow row = run_rep(rep);
        for (std::size_t a = 0; a < specs.size(); ++a) {
          per_rep[a][static_cast<std::size_t>(rep - 1)] =
              std::move(row.per_analysis[a]);
        }
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker, t);
    for (std::thread& t : pool) t.join();
  }

  const std::vector<double> truth = params.truth();
  const double z = normal_quantile(0.975);

  SimulationReport report;
  report.params = params;
  for (std::size_t a = 0; a < specs.size(); ++a) {
    AnalysisSummary summary;
    summary.label = specs[a].label;
    summary.pool_size = specs[a].pool_size;
    summary.n_pools =
        specs[a].pool_size == 0 ? params.n_sets : specs[a].plan.n_pools();
    summary.per_rep = std::move(per_rep[a]);

    for (const RepEstimate& estimate : summary.per_rep) {
      if (estimate.ok) {
        ++summary.converged_reps;
      } else {
        ++summary.failed_reps;
      }
    }

    for (std::size_t j = 0; j < truth.size(); ++j) {
      ParamSummary param;
      param.name = kParamNames[j];
      param.term = kTermNames[j];
      param.truth = truth[j];

      double sum = 0.0;
      double se_sum = 0.0;
      int covered = 0;
      for (const RepEstimate& estimate : summary.per_rep) {
        if (!estimate.ok) continue;
        sum += estimate.estimate[j];
        se_sum += estimate.se[j];
        const double lo = estimate.estimate[j] - z * estimate.se[j];
        const double hi = estimate.estimate[j] + z * estimate.se[j];
        if (lo <= truth[j] && truth[j] <= hi) ++covered;
      }
      const int n = summary.converged_reps;
      param.mean_estimate =
          n > 0 ? sum / n : std::numeric_limits<double>::quiet_NaN();
      param.model_se =
          n > 0 ? se_sum / n : std::numeric_limits<double>::quiet_NaN();
      param.coverage = n > 0 ? static_cast<double>(covered) / n
                             : std::numeric_limits<double>::quiet_NaN();
      if (n > 1) {
        double ss = 0.0;
        for (const RepEstimate& estimate : summary.per_rep) {
          if (!estimate.ok) continue;
          const double d = estimate.estimate[j] - param.mean_estimate;
          ss += d * d;
        }
        param.mcse = std::sqrt(ss / (n - 1));
      } else {
        param.mcse = std::numeric_limits<double>::quiet_NaN();
      }
      summary.params.push_back(std::move(param));
    }
    report.analyses.push_back(std::move(summary));
  }
  return report;
}

void scatter_export(const SimulationReport& report, int pool_size,
                    std::ostream& out) {
  const AnalysisSummary* unpooled = nullptr;
  const AnalysisSummary* pooled = nullptr;
  for (const AnalysisSummary& analysis : report.analyses) {
    if (analysis.pool_size == 0) unpooled = &analysis;
    if (analysis.pool_size == pool_size && pool_size != 0) pooled = &analysis;
  }
  if (unpooled == nullptr || pooled == nullptr) {
    throw Error(Errc::kConfigError,
                "report holds no pooled analysis with g=" +
                    std::to_string(pool_size));
  }

  out << "rep,parameter,truth,unpooled,pooled\n";
  const std::size_t reps =
      std::min(unpooled->per_rep.size(), pooled->per_rep.size());
  const std::vector<double> truth = report.params.truth();
  for (std::size_t rep = 0; rep < reps; ++rep) {
    const RepEstimate& u = unpooled->per_rep[rep];
    const RepEstimate& p = pooled->per_rep[rep];
    if (!u.ok || !p.ok) continue;
    for (std::size_t j = 0; j < truth.size(); ++j) {
      out << (rep + 1) << ',' << kParamNames[j] << ','
          << format_double(truth[j]) << ',' << format_double(u.estimate[j])
          << ',' << format_double(p.estimate[j]) << '\n';
    }
  }
}

}  // namespace poolclr
