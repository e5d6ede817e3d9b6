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
#include <string>
#include <vector>

#include <doctest.h>

#include "poolclr/errors.hpp"
#include "poolclr/terms.hpp"

namespace poolclr {
namespace {

TEST_CASE("plain covariate parses to a single var factor") {
  const TermSpec term = parse_term_spec("marker");
  CHECK(term.first.kind == TermFactor::Kind::kVar);
  CHECK(term.first.name == "marker");
  CHECK_FALSE(term.second.has_value());
  CHECK(render_term(term) == "marker");
}

TEST_CASE("log atom parses and renders") {
  const TermSpec term = parse_term_spec("log(age)");
  CHECK(term.first.kind == TermFactor::Kind::kLog);
  CHECK(term.first.name == "age");
  CHECK(render_term(term) == "log(age)");
}

TEST_CASE("power atom parses and renders") {
  const TermSpec term = parse_term_spec("dose^3");
  CHECK(term.first.kind == TermFactor::Kind::kPower);
  CHECK(term.first.power == 3);
  CHECK(render_term(term) == "dose^3");
}

TEST_CASE("interaction of two atoms") {
  const TermSpec term = parse_term_spec("log(age):marker");
  REQUIRE(term.second.has_value());
  CHECK(term.first.kind == TermFactor::Kind::kLog);
  CHECK(term.second->kind == TermFactor::Kind::kVar);
  CHECK(term.second->name == "marker");
  CHECK(render_term(term) == "log(age):marker");
}

TEST_CASE("whitespace is ignored everywhere") {
  CHECK(parse_term_spec("  log( age ) :  marker ") ==
        parse_term_spec("log(age):marker"));
  CHECK(parse_term_spec(" dose ^ 2 ") == parse_term_spec("dose^2"));
}

TEST_CASE("render then reparse is the identity") {
  const std::vector<std::string> inputs = {
      "x", "log(x)", "x^2", "x^17", "a:b", "log(a):b", "a^2:log(b)",
      "x_1.y:log(z_9)"};
  for (const std::string& text : inputs) {
    const TermSpec term = parse_term_spec(text);
    CHECK(parse_term_spec(render_term(term)) == term);
  }
}

TEST_CASE("names admit underscore, digits, and dots after the first char") {
  const TermSpec term = parse_term_spec("_ab.c1");
  CHECK(term.first.name == "_ab.c1");
  CHECK_THROWS_AS(parse_term_spec("1abc"), Error);
}

TEST_CASE("unclosed log reports the offset of the missing parenthesis") {
  try {
    parse_term_spec("log(age");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::kParseError);
    CHECK(std::string(e.what()).find("at offset 7") != std::string::npos);
  }
}

TEST_CASE("power below two is rejected at the integer's offset") {
  try {
    parse_term_spec("x^1");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::kParseError);
    CHECK(std::string(e.what()).find("power must be an integer >= 2") !=
          std::string::npos);
    CHECK(std::string(e.what()).find("at offset 2") != std::string::npos);
  }
}

TEST_CASE("trailing characters after a valid term are rejected") {
  CHECK_THROWS_AS(parse_term_spec("a:b:c"), Error);
  CHECK_THROWS_AS(parse_term_spec("a b"), Error);
  CHECK_THROWS_AS(parse_term_spec("a)"), Error);
}

TEST_CASE("empty and operator-only inputs are rejected") {
  CHECK_THROWS_AS(parse_term_spec(""), Error);
  CHECK_THROWS_AS(parse_term_spec(":"), Error);
  CHECK_THROWS_AS(parse_term_spec("a:"), Error);
  CHECK_THROWS_AS(parse_term_spec("^2"), Error);
}

TEST_CASE("evaluate_factor computes var, log, and power") {
  const TermFactor var{TermFactor::Kind::kVar, "x", 1};
  const TermFactor logf{TermFactor::Kind::kLog, "x", 1};
  const TermFactor pow4{TermFactor::Kind::kPower, "x", 4};
  CHECK(evaluate_factor(var, 2.5) == 2.5);
  CHECK(evaluate_factor(logf, std::exp(1.0)) == doctest::Approx(1.0));
  CHECK(evaluate_factor(pow4, 3.0) == 81.0);
}

TEST_CASE("log of a non-positive value is a domain error naming the factor") {
  const TermFactor logf{TermFactor::Kind::kLog, "age", 1};
  try {
    evaluate_factor(logf, 0.0);
    FAIL("expected DomainError");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::kDomainError);
    CHECK(std::string(e.what()).find("age") != std::string::npos);
  }
  CHECK_THROWS_AS(evaluate_factor(logf, -3.0), Error);
}

TEST_CASE("referenced_variables lists factors in order with repeats") {
  CHECK(referenced_variables(parse_term_spec("a")) ==
        std::vector<std::string>{"a"});
  CHECK(referenced_variables(parse_term_spec("log(a):b")) ==
        std::vector<std::string>{"a", "b"});
  CHECK(referenced_variables(parse_term_spec("a:a^2")) ==
        std::vector<std::string>{"a", "a"});
}

TEST_CASE("max_power_degree treats var and log as degree one") {
  const std::vector<TermSpec> linear = {parse_term_spec("a"),
                                        parse_term_spec("log(b):c")};
  CHECK(max_power_degree(linear) == 1);
  const std::vector<TermSpec> cubic = {parse_term_spec("a"),
                                       parse_term_spec("b^3:c^2")};
  CHECK(max_power_degree(cubic) == 3);
}

}  // namespace
}  // namespace poolclr
