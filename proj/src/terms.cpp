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

#include "poolclr/terms.hpp"

#include <cctype>
#include <cmath>

#include "poolclr/errors.hpp"

namespace poolclr {

namespace {

class TermParser {
 public:
  explicit TermParser(const std::string& text) : text_(text) {}

  TermSpec parse() {
    TermSpec term;
    term.first = parse_atom();
    skip_ws();
    if (!done() && peek() == ':') {
      ++pos_;
      term.second = parse_atom();
    }
    skip_ws();
    if (!done()) {
      throw ParseError(pos_, "unexpected character '" +
                                 std::string(1, peek()) + "'");
    }
    return term;
  }

 private:
  bool done() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }

  void skip_ws() {
    while (!done() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
  }

  std::string parse_name() {
    skip_ws();
    if (done() || !(std::isalpha(static_cast<unsigned char>(peek())) ||
                    peek() == '_')) {
      throw ParseError(pos_, "expected a covariate name");
    }
    std::size_t start = pos_;
    while (!done() && (std::isalnum(static_cast<unsigned char>(peek())) ||
                       peek() == '_' || peek() == '.')) {
      ++pos_;
    }
    return text_.substr(start, pos_ - start);
  }

  TermFactor parse_atom() {
    std::string name = parse_name();
    skip_ws();
    if (name == "log" && !done() && peek() == '(') {
      ++pos_;
      std::string inner = parse_name();
      skip_ws();
      if (done() || peek() != ')') {
        throw ParseError(pos_, "expected ')'");
      }
      ++pos_;
      return TermFactor{TermFactor::Kind::kLog, inner, 1};
    }
    if (!done() && peek() == '^') {
      ++pos_;
      skip_ws();
      if (done() || !std::isdigit(static_cast<unsigned char>(peek()))) {
        throw ParseError(pos_, "expected an integer power");
      }
      std::size_t start = pos_;
      long value = 0;
      while (!done() && std::isdigit(static_cast<unsigned char>(peek()))) {
        value = value * 10 + (peek() - '0');
        if (value > 1000000) {
          throw ParseError(start, "power too large");
        }
        ++pos_;
      }
      if (value < 2) {
        throw ParseError(start, "power must be an integer >= 2");
      }
      return TermFactor{TermFactor::Kind::kPower, name,
                        static_cast<int>(value)};
    }
    return TermFactor{TermFactor::Kind::kVar, name, 1};
  }

  const std::string& text_;
  std::size_t pos_ = 0;
};

}  // namespace

TermSpec parse_term_spec(const std::string& text) {
  return TermParser(text).parse();
}

std::string render_factor(const TermFactor& factor) {
  switch (factor.kind) {
    case TermFactor::Kind::kVar:
      return factor.name;
    case TermFactor::Kind::kLog:
      return "log(" + factor.name + ")";
    case TermFactor::Kind::kPower:
      return factor.name + "^" + std::to_string(factor.power);
  }
  return factor.name;
}

std::string render_term(const TermSpec& term) {
  std::string out = render_factor(term.first);
  if (term.second) {
    out += ":" + render_factor(*term.second);
  }
  return out;
}

std::vector<std::string> referenced_variables(const TermSpec& term) {
  std::vector<std::string> names{term.first.name};
  if (term.second) names.push_back(term.second->name);
  return names;
}

double evaluate_factor(const TermFactor& factor, double value) {
  switch (factor.kind) {
    case TermFactor::Kind::kVar:
      return value;
    case TermFactor::Kind::kLog:
      if (!(value > 0.0)) {
        throw Error(Errc::kDomainError,
                    "log(" + factor.name + ") of non-positive value");
      }
      return std::log(value);
    case TermFactor::Kind::kPower: {
      // Repeated multiplication keeps evaluation bit-for-bit reproducible.
      double out = value;
      for (int i = 1; i < factor.power; ++i) out *= value;
      return out;
    }
  }
  return value;
}

int max_power_degree(const std::vector<TermSpec>& terms) {
  int degree = 1;
  for (const TermSpec& term : terms) {
    degree = std::max(degree, term.first.power);
    if (term.second) degree = std::max(degree, term.second->power);
  }
  return degree;
}

}  // namespace poolclr
