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

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <doctest.h>

#include "poolclr/errors.hpp"
#include "poolclr/model.hpp"
#include "poolclr/sim.hpp"
#include "poolclr/terms.hpp"

namespace poolclr {
namespace {

SimParams small_params() {
  SimParams p;
  p.n_sets = 40;
  p.m = 2;
  p.reps = 6;
  p.poolsizes = {2};
  p.seed = 9001;
  return p;
}

TEST_CASE("the five fitted terms follow the data generating process") {
  const std::vector<TermSpec> terms = sim_terms();
  REQUIRE(terms.size() == 5);
  CHECK(render_term(terms[0]) == "U");
  CHECK(render_term(terms[1]) == "X");
  CHECK(render_term(terms[2]) == "Z1");
  CHECK(render_term(terms[3]) == "Z2");
  CHECK(render_term(terms[4]) == "U:Z2");
}

TEST_CASE("generated cohorts have the requested shape") {
  SimParams params = small_params();
  const Cohort cohort = generate_cohort(params, 1);
  CHECK(cohort.covariate_names ==
        std::vector<std::string>{"U", "X", "Z1", "Z2"});
  REQUIRE(cohort.n_sets() == 40);
  for (const MatchedSet& set : cohort.sets) {
    CHECK(set.subjects.size() == 3);
    CHECK(set.matching_ratio == 2);
    int cases = 0;
    for (const Subject& subject : set.subjects) {
      cases += subject.outcome;
      CHECK(subject.values[0] > 0.0);  // U is log-normal
      const double x = subject.values[1];
      CHECK((x == 0.0 || x == 1.0));
    }
    CHECK(cases == 1);
  }
}

TEST_CASE("the same seed and rep reproduce the cohort bit for bit") {
  SimParams params = small_params();
  const Cohort first = generate_cohort(params, 3);
  const Cohort second = generate_cohort(params, 3);
  REQUIRE(first.n_sets() == second.n_sets());
  for (std::size_t s = 0; s < first.n_sets(); ++s) {
    for (std::size_t j = 0; j < first.sets[s].subjects.size(); ++j) {
      CHECK(first.sets[s].subjects[j].outcome ==
            second.sets[s].subjects[j].outcome);
      CHECK(first.sets[s].subjects[j].values ==
            second.sets[s].subjects[j].values);
    }
  }
  const Cohort other_rep = generate_cohort(params, 4);
  bool differs = false;
  for (std::size_t s = 0; s < first.n_sets() && !differs; ++s) {
    if (first.sets[s].subjects[0].values !=
        other_rep.sets[s].subjects[0].values) {
      differs = true;
    }
  }
  CHECK(differs);
}

TEST_CASE("conditional draws share covariates with the rejection path") {
  SimParams params = small_params();
  params.case_draw = CaseDraw::kConditional;
  const Cohort cohort = generate_cohort(params, 1);
  REQUIRE(cohort.n_sets() == 40);
  for (const MatchedSet& set : cohort.sets) {
    int cases = 0;
    for (const Subject& subject : set.subjects) cases += subject.outcome;
    CHECK(cases == 1);
  }
}

TEST_CASE("with all effects zero the case position is uniform") {
  for (const CaseDraw mode :
       {CaseDraw::kBernoulliRejection, CaseDraw::kConditional}) {
    SimParams params;
    params.n_sets = 10000;
    params.m = 3;
    params.beta = params.gamma = params.delta = params.omega = params.theta =
        0.0;
    params.seed = 12021;
    params.case_draw = mode;
    const Cohort cohort = generate_cohort(params, 1);
    std::vector<double> counts(4, 0.0);
    for (const MatchedSet& set : cohort.sets) {
      counts[set.case_index()] += 1.0;
    }
    const double expected = 10000.0 / 4.0;
    double stat = 0.0;
    for (double c : counts) {
      stat += (c - expected) * (c - expected) / expected;
    }
    const boost::math::chi_squared dist(3.0);
    const double p = boost::math::cdf(boost::math::complement(dist, stat));
    CHECK(p > 0.01);
  }
}

TEST_CASE("impossible acceptance regions stall out with an error") {
  SimParams params;
  params.n_sets = 1;
  params.m = 3;
  params.reps = 1;
  params.poolsizes = {1};
  params.alpha_mean = -60.0;
  params.alpha_sd = 0.0;
  params.seed = 5;
  try {
    generate_cohort(params, 1);
    FAIL("expected GenerationStalled");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::kGenerationStalled);
  }
}

TEST_CASE("parameter validation rejects out-of-range settings") {
  const SimParams good = small_params();
  CHECK_NOTHROW(validate_params(good));
  SimParams p = good;
  p.reps = 0;
  CHECK_THROWS_AS(validate_params(p), Error);
  p = good;
  p.n_sets = 0;
  CHECK_THROWS_AS(validate_params(p), Error);
  p = good;
  p.m = 0;
  CHECK_THROWS_AS(validate_params(p), Error);
  p = good;
  p.x_prevalence = 1.0;
  CHECK_THROWS_AS(validate_params(p), Error);
  p = good;
  p.z1_logu_corr = 1.0;
  CHECK_THROWS_AS(validate_params(p), Error);
  p = good;
  p.alpha_sd = -0.1;
  CHECK_THROWS_AS(validate_params(p), Error);
  p = good;
  p.poolsizes = {0};
  CHECK_THROWS_AS(validate_params(p), Error);
  p = good;
  p.poolsizes = {41};
  CHECK_THROWS_AS(validate_params(p), Error);
}

TEST_CASE("monte carlo runs are reproducible and labeled") {
  SimParams params = small_params();
  const SimulationReport first = run_monte_carlo(params, 1);
  const SimulationReport second = run_monte_carlo(params, 1);
  REQUIRE(first.analyses.size() == 2);
  CHECK(first.analyses[0].label == "unpooled");
  CHECK(first.analyses[0].pool_size == 0);
  CHECK(first.analyses[1].label == "g=2");
  CHECK(first.analyses[1].pool_size == 2);
  CHECK(first.analyses[1].n_pools == 20);
  for (std::size_t a = 0; a < first.analyses.size(); ++a) {
    REQUIRE(first.analyses[a].params.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
      CHECK(first.analyses[a].params[i].mean_estimate ==
            second.analyses[a].params[i].mean_estimate);
      CHECK(first.analyses[a].params[i].mcse ==
            second.analyses[a].params[i].mcse);
      CHECK(first.analyses[a].params[i].coverage ==
            second.analyses[a].params[i].coverage);
    }
  }
  CHECK(first.analyses[0].params[0].name == "beta");
  CHECK(first.analyses[0].params[0].term == "U");
  CHECK(first.analyses[0].params[0].truth == params.beta);
}

TEST_CASE("worker threads do not change the report") {
  SimParams params = small_params();
  const SimulationReport sequential = run_monte_carlo(params, 1);
  const SimulationReport threaded = run_monte_carlo(params, 3);
  REQUIRE(sequential.analyses.size() == threaded.analyses.size());
  for (std::size_t a = 0; a < sequential.analyses.size(); ++a) {
    REQUIRE(sequential.analyses[a].per_rep.size() ==
            threaded.analyses[a].per_rep.size());
    for (std::size_t r = 0; r < sequential.analyses[a].per_rep.size(); ++r) {
      CHECK(sequential.analyses[a].per_rep[r].ok ==
            threaded.analyses[a].per_rep[r].ok);
      CHECK(sequential.analyses[a].per_rep[r].estimate ==
            threaded.analyses[a].per_rep[r].estimate);
    }
    for (std::size_t i = 0; i < 5; ++i) {
      CHECK(sequential.analyses[a].params[i].mcse ==
            threaded.analyses[a].params[i].mcse);
    }
  }
}

TEST_CASE("a single replicate leaves the spread undefined") {
  SimParams params = small_params();
  params.reps = 1;
  const SimulationReport report = run_monte_carlo(params, 1);
  for (const AnalysisSummary& analysis : report.analyses) {
    if (analysis.converged_reps == 0) continue;
    for (const ParamSummary& param : analysis.params) {
      CHECK(std::isnan(param.mcse));
      CHECK_FALSE(std::isnan(param.mean_estimate));
    }
  }
}

TEST_CASE("failed replicates are tallied and excluded") {
  SimParams params = small_params();
  params.n_sets = 8;  // tiny cohorts separate often
  params.reps = 20;
  params.beta = 2.0;
  const SimulationReport report = run_monte_carlo(params, 1);
  for (const AnalysisSummary& analysis : report.analyses) {
    CHECK(analysis.converged_reps + analysis.failed_reps == 20);
    int ok = 0;
    for (const RepEstimate& rep : analysis.per_rep) {
      if (rep.ok) {
        ++ok;
      } else {
        CHECK_FALSE(rep.error.empty());
      }
    }
    CHECK(ok == analysis.converged_reps);
  }
}

TEST_CASE("scatter export pairs unpooled and pooled estimates per rep") {
  SimParams params = small_params();
  params.reps = 10;
  const SimulationReport report = run_monte_carlo(params, 1);
  std::ostringstream out;
  scatter_export(report, 2, out);
  std::istringstream lines(out.str());
  std::string line;
  REQUIRE(std::getline(lines, line));
  CHECK(line == "rep,parameter,truth,unpooled,pooled");
  int rows = 0;
  while (std::getline(lines, line)) {
    if (!line.empty()) ++rows;
  }
  int both_ok = 0;
  for (std::size_t r = 0; r < report.analyses[0].per_rep.size(); ++r) {
    if (report.analyses[0].per_rep[r].ok && report.analyses[1].per_rep[r].ok) {
      ++both_ok;
    }
  }
  CHECK(rows == 5 * both_ok);
  CHECK_THROWS_AS(scatter_export(report, 6, out), Error);
}

TEST_CASE("singleton pooling inside the harness equals the unpooled fit") {
  SimParams params = small_params();
  params.poolsizes = {1};
  params.reps = 4;
  const SimulationReport report = run_monte_carlo(params, 1);
  REQUIRE(report.analyses.size() == 2);
  const AnalysisSummary& unpooled = report.analyses[0];
  const AnalysisSummary& identity = report.analyses[1];
  CHECK(identity.label == "g=1");
  for (std::size_t r = 0; r < unpooled.per_rep.size(); ++r) {
    REQUIRE(unpooled.per_rep[r].ok == identity.per_rep[r].ok);
    if (!unpooled.per_rep[r].ok) continue;
    for (std::size_t j = 0; j < 5; ++j) {
      CHECK(std::abs(unpooled.per_rep[r].estimate[j] -
                     identity.per_rep[r].estimate[j]) <= 1e-10);
      CHECK(std::abs(unpooled.per_rep[r].se[j] -
                     identity.per_rep[r].se[j]) <= 1e-10);
    }
  }
}

}  // namespace
}  // namespace poolclr
