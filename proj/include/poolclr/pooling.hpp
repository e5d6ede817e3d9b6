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

#ifndef POOLCLR_POOLING_HPP_
#define POOLCLR_POOLING_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "poolclr/clr.hpp"
#include "poolclr/design.hpp"
#include "poolclr/model.hpp"

namespace poolclr {

enum class PoolPolicy { kCoverAll, kDropRemainder };

const char* pool_policy_name(PoolPolicy policy);
PoolPolicy parse_pool_policy(const std::string& name);

struct PoolBlock {
  int pool_size = 0;   // g
  int pool_count = 0;  // k

  friend bool operator==(const PoolBlock&, const PoolBlock&) = default;
};

// The poolsize arithmetic: k_1 pools of g_1, optionally k_2 pools of a
// single secondary size g_2 (at most two distinct sizes), plus the number of
// matched sets dropped under the drop-remainder policy.
struct PoolPlan {
  std::vector<PoolBlock> blocks;
  int dropped_sets = 0;
  PoolPolicy policy = PoolPolicy::kCoverAll;
  int matching_ratio = 0;

  int total_sets() const;
  int n_pools() const;
};

struct Pool {
  int pool_id = 0;
  std::vector<std::string> members;  // stratum ids, input order within pool
};

struct PoolAssignment {
  std::vector<Pool> pools;
  std::vector<std::string> dropped;  // stratum ids excluded by the plan
  std::uint64_t seed = 0;
  // Present when pooling was stratified on an effect-modifier label.
  std::map<std::string, std::string> strata_labels;
};

// A pooled dataset: one design stratum per pool (case row = sum of term
// values over member cases; control row c = sum over the members' c-th
// controls, in input order).
struct PooledDesign {
  ConditionalDesign design;
  std::vector<TermSpec> terms;
  int matching_ratio = 0;
};

// Computes the block structure for pooling n_sets matched sets with primary
// size g. cover_all covers every set using at most one secondary size g2 in
// [secondary_min, g - 1]; candidate g2 values are scanned in ascending order
// and the smallest feasible pool count k2 is taken. drop_remainder uses
// floor(n_sets / g) pools and drops the remainder. Requires g >= 2 (plans
// with singleton pools can be constructed directly; pooling with g = 1 is
// the identity and needs no arithmetic).
PoolPlan plan_pools(int n_sets, int g, PoolPolicy policy,
                    int secondary_min = 3);

// Human-readable block summary, e.g. "476×5 + 3×3, 0 dropped".
std::string plan_summary(const PoolPlan& plan);

// Uniform random partition of the cohort's matched sets per the plan,
// deterministic in the seed. Pool ids are 1-based and canonicalized so that
// pools are numbered by the earliest cohort position among their members.
// When strata_labels is non-empty every pool is label-homogeneous: the plan
// arithmetic is recomputed per label class (SparseLabelClass when a class is
// smaller than the plan allows).
PoolAssignment assign_pools(const Cohort& cohort, const PoolPlan& plan,
                            std::uint64_t seed,
                            const std::map<std::string, std::string>&
                                strata_labels = {},
                            int secondary_min = 3);

// Key-level worker used by both assign_pools and the analytical center,
// which sees stratum keys but never covariates.
PoolAssignment assign_pool_keys(const std::vector<std::string>& stratum_keys,
                                const PoolPlan& plan, std::uint64_t seed,
                                const std::map<std::string, std::string>&
                                    strata_labels = {},
                                int secondary_min = 3);

// Sums per-subject term values into pool rows. Values are transformed
// before summation by construction (evaluate_term runs per subject).
// DomainErrors are reported at node + stratum granularity, never naming a
// subject id.
PooledDesign aggregate(const Cohort& cohort, const PoolAssignment& assignment,
                       const std::vector<TermSpec>& terms);

struct RepeatResult {
  std::uint64_t seed = 0;
  std::optional<FitResult> fit;
  std::string error;  // empty when fit holds a value
};

// Repeats assign + aggregate + fit R times with seeds base_seed+1..+R.
// Fit errors are captured per repeat without aborting the batch; results
// are ordered by seed.
std::vector<RepeatResult> repeat_pooling(const Cohort& cohort,
                                         const PoolPlan& plan,
                                         const std::vector<TermSpec>& terms,
                                         int repeats, std::uint64_t base_seed,
                                         const FitOptions& opts = {});

// Advisory diagnostics. A pool size at or below the largest power among the
// terms lets a recipient solve algebraically for individual covariate
// values; pool sizes above 10 trade too much information for bias.
std::vector<std::string> plan_warnings(const PoolPlan& plan,
                                       const std::vector<TermSpec>& terms);

nlohmann::json plan_to_json(const PoolPlan& plan);
nlohmann::json assignment_to_json(const PoolPlan& plan,
                                  const PoolAssignment& assignment);

}  // namespace poolclr

#endif  // POOLCLR_POOLING_HPP_
