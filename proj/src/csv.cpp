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

#include "poolclr/csv.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "poolclr/errors.hpp"

namespace poolclr {
namespace {

std::vector<std::string> split_line(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string location(const std::string& source, std::size_t line_no) {
  return source + ":" + std::to_string(line_no);
}

int parse_outcome(const std::string& field, const std::string& source,
                  std::size_t line_no) {
  int value = 0;
  auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw Error(Errc::kParseError, location(source, line_no) +
                                       ": outcome '" + field +
                                       "' is not an integer");
  }
  return value;
}

double parse_real(const std::string& field, const std::string& column,
                  const std::string& source, std::size_t line_no) {
  double value = 0.0;
  auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw Error(Errc::kParseError, location(source, line_no) + ": column '" +
                                       column + "' value '" + field +
                                       "' is not a real number");
  }
  return value;
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(Errc::kIoError, "cannot open '" + path + "' for reading");
  }
  return in;
}

}  // namespace

CohortCsv read_cohort_csv(std::istream& in, const std::string& source_name) {
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(Errc::kParseError, source_name + " is empty; header expected");
  }
  std::vector<std::string> header = split_line(std::move(line));
  const std::vector<std::string> fixed = {"stratum_id", "node_id",
                                          "subject_id", "outcome"};
  if (header.size() < fixed.size() ||
      !std::equal(fixed.begin(), fixed.end(), header.begin())) {
    throw Error(Errc::kParseError,
                location(source_name, 1) +
                    ": header must start with "
                    "'stratum_id,node_id,subject_id,outcome'");
  }

  CohortCsv csv;
  csv.covariate_names.assign(header.begin() + fixed.size(), header.end());

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::vector<std::string> fields = split_line(std::move(line));
    if (fields.size() != header.size()) {
      throw Error(Errc::kParseError,
                  location(source_name, line_no) + ": row has " +
                      std::to_string(fields.size()) + " fields; " +
                      std::to_string(header.size()) + " expected");
    }
    RawRow row;
    row.stratum_id = fields[0];
    row.node_id = fields[1];
    row.subject_id = fields[2];
    row.outcome = parse_outcome(fields[3], source_name, line_no);
    row.values.reserve(csv.covariate_names.size());
    for (std::size_t i = 0; i < csv.covariate_names.size(); ++i) {
      row.values.push_back(parse_real(fields[fixed.size() + i],
                                      csv.covariate_names[i], source_name,
                                      line_no));
    }
    csv.rows.push_back(std::move(row));
  }
  return csv;
}

CohortCsv read_cohort_csv_file(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  return read_cohort_csv(in, path);
}

void write_cohort_csv(std::ostream& out, const Cohort& cohort) {
  out << "stratum_id,node_id,subject_id,outcome";
  for (const std::string& name : cohort.covariate_names) out << ',' << name;
  out << '\n';
  for (const MatchedSet& set : cohort.sets) {
    for (const Subject& subject : set.subjects) {
      out << subject.stratum_id << ',' << subject.node_id << ','
          << subject.subject_id << ',' << subject.outcome;
      for (double value : subject.values) out << ',' << format_double(value);
      out << '\n';
    }
  }
}

void write_pooled_csv(std::ostream& out, const PooledDesign& pooled) {
  out << "pool_id,outcome";
  for (const std::string& name : pooled.design.term_names) out << ',' << name;
  out << '\n';
  for (const DesignStratum& stratum : pooled.design.strata) {
    for (Eigen::Index r = 0; r < stratum.x.rows(); ++r) {
      out << stratum.key << ',' << (r == 0 ? 1 : 0);
      for (Eigen::Index c = 0; c < stratum.x.cols(); ++c) {
        out << ',' << format_double(stratum.x(r, c));
      }
      out << '\n';
    }
  }
}

ConditionalDesign read_pooled_csv(std::istream& in,
                                  const std::string& source_name) {
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(Errc::kParseError, source_name + " is empty; header expected");
  }
  std::vector<std::string> header = split_line(std::move(line));
  if (header.size() < 3 || header[0] != "pool_id" || header[1] != "outcome") {
    throw Error(Errc::kParseError,
                location(source_name, 1) +
                    ": header must start with 'pool_id,outcome' followed by "
                    "at least one term column");
  }

  struct PoolRows {
    std::vector<std::vector<double>> cases;
    std::vector<std::vector<double>> controls;
  };
  std::vector<std::string> order;
  std::unordered_map<std::string, PoolRows> pools;

  const std::size_t n_terms = header.size() - 2;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::vector<std::string> fields = split_line(std::move(line));
    if (fields.size() != header.size()) {
      throw Error(Errc::kParseError,
                  location(source_name, line_no) + ": row has " +
                      std::to_string(fields.size()) + " fields; " +
                      std::to_string(header.size()) + " expected");
    }
    int outcome = parse_outcome(fields[1], source_name, line_no);
    if (outcome != 0 && outcome != 1) {
      throw Error(Errc::kParseError, location(source_name, line_no) +
                                         ": outcome must be 0 or 1");
    }
    std::vector<double> values;
    values.reserve(n_terms);
    for (std::size_t i = 0; i < n_terms; ++i) {
      values.push_back(
          parse_real(fields[2 + i], header[2 + i], source_name, line_no));
    }
    auto [it, inserted] = pools.try_emplace(fields[0]);
    if (inserted) order.push_back(fields[0]);
    if (outcome == 1) {
      it->second.cases.push_back(std::move(values));
    } else {
      it->second.controls.push_back(std::move(values));
    }
  }

  ConditionalDesign design;
  design.term_names.assign(header.begin() + 2, header.end());
  design.strata.reserve(order.size());
  for (const std::string& key : order) {
    const PoolRows& rows = pools.at(key);
    if (rows.cases.empty()) {
      throw Error(Errc::kStratumWithoutCase,
                  "pool " + key + " has no outcome=1 row");
    }
    if (rows.cases.size() > 1) {
      throw Error(Errc::kStratumWithMultipleCases,
                  "pool " + key + " has " + std::to_string(rows.cases.size()) +
                      " outcome=1 rows");
    }
    if (rows.controls.empty()) {
      throw Error(Errc::kStratumWithoutControl,
                  "pool " + key + " has no outcome=0 row");
    }
    DesignStratum stratum;
    stratum.key = key;
    stratum.x.resize(static_cast<Eigen::Index>(1 + rows.controls.size()),
                     static_cast<Eigen::Index>(n_terms));
    for (std::size_t c = 0; c < n_terms; ++c) {
      stratum.x(0, static_cast<Eigen::Index>(c)) = rows.cases[0][c];
    }
    for (std::size_t r = 0; r < rows.controls.size(); ++r) {
      for (std::size_t c = 0; c < n_terms; ++c) {
        stratum.x(static_cast<Eigen::Index>(r + 1),
                  static_cast<Eigen::Index>(c)) = rows.controls[r][c];
      }
    }
    design.strata.push_back(std::move(stratum));
  }
  return design;
}

ConditionalDesign read_pooled_csv_file(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  return read_pooled_csv(in, path);
}

bool is_pooled_csv_file(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  std::string line;
  if (!std::getline(in, line)) return false;
  std::vector<std::string> header = split_line(std::move(line));
  return !header.empty() && header[0] == "pool_id";
}

std::string format_double(double value) {
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

}  // namespace poolclr
