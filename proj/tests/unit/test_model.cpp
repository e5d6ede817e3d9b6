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

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <doctest.h>

#include "poolclr/design.hpp"
#include "poolclr/errors.hpp"
#include "poolclr/model.hpp"

namespace poolclr {
namespace {

RawRow row(const std::string& stratum, const std::string& subject, int outcome,
           std::vector<double> values) {
  RawRow r;
  r.stratum_id = stratum;
  r.node_id = "n";
  r.subject_id = subject;
  r.outcome = outcome;
  r.values = std::move(values);
  return r;
}

TEST_CASE("strata group by first appearance and keep subject input order") {
  const std::vector<RawRow> rows = {
      row("b", "1", 0, {1.0}), row("a", "2", 1, {2.0}),
      row("b", "3", 1, {3.0}), row("a", "4", 0, {4.0}),
      row("b", "5", 0, {5.0}),
  };
  const Cohort cohort = validate_cohort({"x"}, rows);
  REQUIRE(cohort.n_sets() == 2);
  CHECK(cohort.sets[0].stratum_id == "b");
  CHECK(cohort.sets[1].stratum_id == "a");
  CHECK(cohort.sets[0].subjects[0].subject_id == "1");
  CHECK(cohort.sets[0].subjects[1].subject_id == "3");
  CHECK(cohort.sets[0].subjects[2].subject_id == "5");
  CHECK(cohort.sets[0].matching_ratio == 2);
  CHECK(cohort.sets[1].matching_ratio == 1);
}

TEST_CASE("case_index finds the case wherever it sits") {
  const std::vector<RawRow> rows = {
      row("s", "1", 0, {1.0}), row("s", "2", 0, {2.0}),
      row("s", "3", 1, {3.0}),
  };
  const Cohort cohort = validate_cohort({"x"}, rows);
  CHECK(cohort.sets[0].case_index() == 2);
  CHECK(cohort.sets[0].case_subject().subject_id == "3");
  const auto controls = cohort.sets[0].controls();
  REQUIRE(controls.size() == 2);
  CHECK(controls[0]->subject_id == "1");
  CHECK(controls[1]->subject_id == "2");
}

TEST_CASE("empty input yields an empty cohort and a warning") {
  std::vector<std::string> warnings;
  const Cohort cohort = validate_cohort({"x"}, {}, &warnings);
  CHECK(cohort.n_sets() == 0);
  REQUIRE(warnings.size() == 1);
}

TEST_CASE("duplicate subject ids are rejected") {
  const std::vector<RawRow> rows = {
      row("s", "1", 1, {1.0}), row("s", "1", 0, {2.0}),
  };
  try {
    validate_cohort({"x"}, rows);
    FAIL("expected DuplicateSubject");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::kDuplicateSubject);
    CHECK(std::string(e.what()).find("'1'") != std::string::npos);
  }
}

TEST_CASE("outcome outside {0,1} is rejected") {
  const std::vector<RawRow> rows = {
      row("s", "1", 2, {1.0}), row("s", "2", 0, {2.0}),
  };
  CHECK_THROWS_AS(validate_cohort({"x"}, rows), Error);
}

TEST_CASE("value count must match the covariate list") {
  const std::vector<RawRow> rows = {
      row("s", "1", 1, {1.0}), row("s", "2", 0, {2.0, 3.0}),
  };
  try {
    validate_cohort({"x"}, rows);
    FAIL("expected MissingCovariate");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::kMissingCovariate);
  }
}

TEST_CASE("non-finite covariate values are rejected with names") {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const std::vector<RawRow> rows = {
      row("s", "1", 1, {1.0, 2.0}), row("s", "2", 0, {1.0, nan}),
  };
  try {
    validate_cohort({"x", "y"}, rows);
    FAIL("expected NonFiniteValue");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::kNonFiniteValue);
    CHECK(std::string(e.what()).find("y") != std::string::npos);
    CHECK(std::string(e.what()).find("'2'") != std::string::npos);
  }
}

TEST_CASE("a stratum needs exactly one case and at least one control") {
  const std::vector<RawRow> no_case = {row("s", "1", 0, {1.0}),
                                       row("s", "2", 0, {2.0})};
  const std::vector<RawRow> two_cases = {row("s", "1", 1, {1.0}),
                                         row("s", "2", 1, {2.0}),
                                         row("s", "3", 0, {3.0})};
  const std::vector<RawRow> no_control = {row("s", "1", 1, {1.0})};
  CHECK_THROWS_AS(validate_cohort({"x"}, no_case), Error);
  CHECK_THROWS_AS(validate_cohort({"x"}, two_cases), Error);
  CHECK_THROWS_AS(validate_cohort({"x"}, no_control), Error);
}

TEST_CASE("uniform_matching_ratio detects mixed designs") {
  const std::vector<RawRow> uniform = {
      row("a", "1", 1, {1.0}), row("a", "2", 0, {2.0}),
      row("b", "3", 1, {3.0}), row("b", "4", 0, {4.0}),
  };
  const std::vector<RawRow> mixed = {
      row("a", "1", 1, {1.0}), row("a", "2", 0, {2.0}),
      row("b", "3", 1, {3.0}), row("b", "4", 0, {4.0}),
      row("b", "5", 0, {5.0}),
  };
  CHECK(validate_cohort({"x"}, uniform).uniform_matching_ratio() == 1);
  CHECK_FALSE(validate_cohort({"x"}, mixed).uniform_matching_ratio()
                  .has_value());
}

TEST_CASE("covariate_index resolves names and rejects unknowns") {
  const std::vector<RawRow> rows = {row("s", "1", 1, {1.0, 2.0}),
                                    row("s", "2", 0, {3.0, 4.0})};
  const Cohort cohort = validate_cohort({"x", "y"}, rows);
  CHECK(cohort.covariate_index("y") == 1);
  try {
    cohort.covariate_index("z");
    FAIL("expected UnknownVariable");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::kUnknownVariable);
  }
}

TEST_CASE("build_design maps the case to row zero and evaluates terms") {
  const std::vector<RawRow> rows = {
      row("s", "1", 0, {2.0, 10.0}), row("s", "2", 1, {3.0, 20.0}),
      row("s", "3", 0, {4.0, 30.0}),
  };
  const Cohort cohort = validate_cohort({"a", "b"}, rows);
  const std::vector<TermSpec> terms = {parse_term_spec("log(a)"),
                                       parse_term_spec("a:b")};
  const ConditionalDesign design = build_design(cohort, terms);
  REQUIRE(design.n_strata() == 1);
  REQUIRE(design.term_names ==
          std::vector<std::string>{"log(a)", "a:b"});
  const Eigen::MatrixXd& x = design.strata[0].x;
  REQUIRE(x.rows() == 3);
  CHECK(x(0, 0) == doctest::Approx(std::log(3.0)));
  CHECK(x(0, 1) == 60.0);
  CHECK(x(1, 0) == doctest::Approx(std::log(2.0)));
  CHECK(x(1, 1) == 20.0);
  CHECK(x(2, 0) == doctest::Approx(std::log(4.0)));
  CHECK(x(2, 1) == 120.0);
}

TEST_CASE("build_design with no terms is a configuration error") {
  const std::vector<RawRow> rows = {row("s", "1", 1, {1.0}),
                                    row("s", "2", 0, {2.0})};
  const Cohort cohort = validate_cohort({"x"}, rows);
  CHECK_THROWS_AS(build_design(cohort, {}), Error);
}

TEST_CASE("build_design surfaces evaluation domain errors") {
  const std::vector<RawRow> rows = {row("s", "1", 1, {-1.0}),
                                    row("s", "2", 0, {2.0})};
  const Cohort cohort = validate_cohort({"x"}, rows);
  CHECK_THROWS_AS(build_design(cohort, {parse_term_spec("log(x)")}), Error);
}

}  // namespace
}  // namespace poolclr
