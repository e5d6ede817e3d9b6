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

#ifndef POOLCLR_CSV_HPP_
#define POOLCLR_CSV_HPP_

#include <iosfwd>
#include <string>
#include <vector>

#include "poolclr/design.hpp"
#include "poolclr/model.hpp"
#include "poolclr/pooling.hpp"

namespace poolclr {

// Cohort CSV schema: header `stratum_id,node_id,subject_id,outcome,<covariate...>`,
// one subject per row, outcome in {0,1}, covariates as decimal reals.
// Fields are comma-separated with no quoting; reals are written in
// shortest-round-trip form so re-exporting a cohort echoes it bit-exactly.
struct CohortCsv {
  std::vector<std::string> covariate_names;
  std::vector<RawRow> rows;
};

CohortCsv read_cohort_csv(std::istream& in, const std::string& source_name);
CohortCsv read_cohort_csv_file(const std::string& path);

void write_cohort_csv(std::ostream& out, const Cohort& cohort);

// Pooled CSV schema: header `pool_id,outcome,<term...>` where term columns
// carry rendered term names. Each pool emits its case row (outcome 1)
// followed by its control rows (outcome 0) in alignment order; the pool id
// column carries the design stratum key.
void write_pooled_csv(std::ostream& out, const PooledDesign& pooled);

// Reads a pooled CSV back into a fit-ready design. Pools are ordered by
// first appearance; within a pool, the single outcome=1 row is the case row
// and control rows keep file order.
ConditionalDesign read_pooled_csv(std::istream& in,
                                  const std::string& source_name);
ConditionalDesign read_pooled_csv_file(const std::string& path);

// True when the file's header starts with pool_id (an aggregate-level file).
bool is_pooled_csv_file(const std::string& path);

// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

}  // namespace poolclr

#endif  // POOLCLR_CSV_HPP_
