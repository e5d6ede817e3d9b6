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

#include "poolclr/pooling.hpp"

#include <algorithm>
#include <limits>
#include <unordered_map>

#include "poolclr/errors.hpp"
#include "poolclr/rng.hpp"

namespace poolclr {
namespace {

// Unbiased draw from {0, ..., n-1} by rejection, so assignments are
// reproducible across standard library implementations.
std::uint64_t bounded_draw(std::mt19937_64& engine, std::uint64_t n) {
  const std::uint64_t rem =
      (std::numeric_limits<std::uint64_t>::max() % n + 1) % n;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - rem;
  std::uint64_t value = engine();
  while (value > limit) value = engine();
  return value % n;
}

void fisher_yates(std::vector<std::size_t>& items, std::mt19937_64& engine) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(bounded_draw(engine, i));
    std::swap(items[i - 1], items[j]);
  }
}

// Partitions positions (indices into the caller's key list) per the plan:
// primary-size pools first, then secondary, remainder dropped. The shuffle
// makes the partition uniform; carving is deterministic afterwards.
struct RawPartition {
  std::vector<std::vector<std::size_t>> pools;
  std::vector<std::size_t> dropped;
};

RawPartition partition_positions(std::vector<std::size_t> positions,
                                 const PoolPlan& plan,
                                 std::mt19937_64& engine) {
  fisher_yates(positions, engine);
  RawPartition out;
  std::size_t next = 0;
  for (const PoolBlock& block : plan.blocks) {
    for (int k = 0; k < block.pool_count; ++k) {
      std::vector<std::size_t> members(
          positions.begin() + static_cast<std::ptrdiff_t>(next),
          positions.begin() +
              static_cast<std::ptrdiff_t>(next + block.pool_size));
      next += static_cast<std::size_t>(block.pool_size);
      out.pools.push_back(std::move(members));
    }
  }
  out.dropped.assign(positions.begin() + static_cast<std::ptrdiff_t>(next),
                     positions.end());
  return out;
}

}  // namespace

const char* pool_policy_name(PoolPolicy policy) {
  return policy == PoolPolicy::kCoverAll ? "cover-all" : "drop-remainder";
}

PoolPolicy parse_pool_policy(const std::string& name) {
  if (name == "cover-all" || name == "cover_all") return PoolPolicy::kCoverAll;
  if (name == "drop-remainder" || name == "drop_remainder") {
    return PoolPolicy::kDropRemainder;
  }
  throw Error(Errc::kConfigError,
              "unknown pooling policy '" + name +
                  "'; expected cover-all or drop-remainder");
}

int PoolPlan::total_sets() const {
  int n = dropped_sets;
  for (const PoolBlock& block : blocks) n += block.pool_size * block.pool_count;
  return n;
}

int PoolPlan::n_pools() const {
  int k = 0;
  for (const PoolBlock& block : blocks) k += block.pool_count;
  return k;
}

PoolPlan plan_pools(int n_sets, int g, PoolPolicy policy, int secondary_min) {
  if (g < 2) {
    throw Error(Errc::kInvalidPoolsize,
                "pool size must be at least 2 (got " + std::to_string(g) +
                    "); singleton pooling is the identity and needs no plan");
  }
  if (secondary_min < 2) {
    throw Error(Errc::kConfigError,
                "secondary pool size floor must be at least 2 (got " +
                    std::to_string(secondary_min) + ")");
  }
  if (n_sets < g) {
    throw Error(Errc::kInfeasible,
                "cannot pool " + std::to_string(n_sets) +
                    " matched sets with pool size " + std::to_string(g) +
                    ": fewer sets than one pool");
  }

  PoolPlan plan;
  plan.policy = policy;
  const int remainder = n_sets % g;

  if (policy == PoolPolicy::kDropRemainder) {
    plan.blocks.push_back(PoolBlock{g, n_sets / g});
    plan.dropped_sets = remainder;
    return plan;
  }

  if (remainder == 0) {
    plan.blocks.push_back(PoolBlock{g, n_sets / g});
    return plan;
  }

  for (int g2 = secondary_min; g2 < g; ++g2) {
    const int max_k2 = (n_sets - g) / g2;
    for (int k2 = 1; k2 <= max_k2; ++k2) {
      if ((k2 * g2) % g == remainder) {
        plan.blocks.push_back(PoolBlock{g, (n_sets - k2 * g2) / g});
        plan.blocks.push_back(PoolBlock{g2, k2});
        return plan;
      }
    }
  }
  throw Error(Errc::kInfeasible,
              "no secondary pool size in [" + std::to_string(secondary_min) +
                  ", " + std::to_string(g - 1) + "] covers " +
                  std::to_string(n_sets) + " sets with primary pool size " +
                  std::to_string(g) + " (remainder " +
                  std::to_string(remainder) + ")");
}

std::string plan_summary(const PoolPlan& plan) {
  std::string out;
  for (std::size_t i = 0; i < plan.blocks.size(); ++i) {
    if (i > 0) out += " + ";
    out += std::to_string(plan.blocks[i].pool_count) + "×" +
           std::to_string(plan.blocks[i].pool_size);
  }
  out += ", " + std::to_string(plan.dropped_sets) + " dropped";
  return out;
}

PoolAssignment assign_pool_keys(
    const std::vector<std::string>& stratum_keys, const PoolPlan& plan,
    std::uint64_t seed, const std::map<std::string, std::string>& strata_labels,
    int secondary_min) {
  if (plan.total_sets() != static_cast<int>(stratum_keys.size())) {
    throw Error(Errc::kPlanMismatch,
                "plan covers " + std::to_string(plan.total_sets()) +
                    " matched sets; " + std::to_string(stratum_keys.size()) +
                    " supplied");
  }
  std::mt19937_64 engine = make_engine(seed, {});

  RawPartition partition;
  if (strata_labels.empty()) {
    std::vector<std::size_t> positions(stratum_keys.size());
    for (std::size_t i = 0; i < positions.size(); ++i) positions[i] = i;
    partition = partition_positions(std::move(positions), plan, engine);
  } else {
    std::vector<std::string> class_order;
    std::unordered_map<std::string, std::vector<std::size_t>> classes;
    for (std::size_t i = 0; i < stratum_keys.size(); ++i) {
      auto label = strata_labels.find(stratum_keys[i]);
      if (label == strata_labels.end()) {
        throw Error(Errc::kPlanMismatch, "stratum '" + stratum_keys[i] +
                                             "' has no pooling label");
      }
      auto [it, inserted] = classes.try_emplace(label->second);
      if (inserted) class_order.push_back(label->second);
      it->second.push_back(i);
    }

    const int g = plan.blocks.front().pool_size;
    for (const std::string& label : class_order) {
      std::vector<std::size_t>& positions = classes.at(label);
      PoolPlan class_plan;
      try {
        class_plan = plan_pools(static_cast<int>(positions.size()), g,
                                plan.policy, secondary_min);
      } catch (const Error& e) {
        throw Error(Errc::kSparseLabelClass,
                    "label class '" + label + "' (" +
                        std::to_string(positions.size()) +
                        " sets) cannot be pooled with pool size " +
                        std::to_string(g) + ": " + e.what());
      }
      RawPartition part =
          partition_positions(std::move(positions), class_plan, engine);
      for (auto& pool : part.pools) partition.pools.push_back(std::move(pool));
      partition.dropped.insert(partition.dropped.end(), part.dropped.begin(),
                               part.dropped.end());
    }
  }

  for (auto& pool : partition.pools) std::sort(pool.begin(), pool.end());
  std::sort(partition.pools.begin(), partition.pools.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  std::sort(partition.dropped.begin(), partition.dropped.end());

  PoolAssignment assignment;
  assignment.seed = seed;
  assignment.strata_labels = strata_labels;
  assignment.pools.reserve(partition.pools.size());
  for (std::size_t i = 0; i < partition.pools.size(); ++i) {
    Pool pool;
    pool.pool_id = static_cast<int>(i) + 1;
    for (std::size_t position : partition.pools[i]) {
      pool.members.push_back(stratum_keys[position]);
    }
    assignment.pools.push_back(std::move(pool));
  }
  for (std::size_t position : partition.dropped) {
    assignment.dropped.push_back(stratum_keys[position]);
  }
  return assignment;
}

PoolAssignment assign_pools(const Cohort& cohort, const PoolPlan& plan,
                            std::uint64_t seed,
                            const std::map<std::string, std::string>&
                                strata_labels,
                            int secondary_min) {
  const std::optional<int> ratio = cohort.uniform_matching_ratio();
  if (!ratio) {
    throw Error(Errc::kPlanMismatch,
                "cohort mixes matching ratios; pools may only group matched "
                "sets of the same structure");
  }
  if (plan.matching_ratio != 0 && plan.matching_ratio != *ratio) {
    throw Error(Errc::kPlanMismatch,
                "plan expects matching ratio " +
                    std::to_string(plan.matching_ratio) + "; cohort has 1:" +
                    std::to_string(*ratio));
  }
  std::vector<std::string> keys;
  keys.reserve(cohort.sets.size());
  for (const MatchedSet& set : cohort.sets) keys.push_back(set.stratum_id);
  return assign_pool_keys(keys, plan, seed, strata_labels, secondary_min);
}

PooledDesign aggregate(const Cohort& cohort, const PoolAssignment& assignment,
                       const std::vector<TermSpec>& terms) {
  if (terms.empty()) {
    throw Error(Errc::kConfigError, "no model terms supplied");
  }
  std::unordered_map<std::string, std::size_t> set_index;
  for (std::size_t i = 0; i < cohort.sets.size(); ++i) {
    set_index.emplace(cohort.sets[i].stratum_id, i);
  }

  const std::optional<int> ratio = cohort.uniform_matching_ratio();
  if (!ratio) {
    throw Error(Errc::kPlanMismatch,
                "cohort mixes matching ratios; pooled arms would not align");
  }
  const int m = *ratio;

  PooledDesign pooled;
  pooled.terms = terms;
  pooled.matching_ratio = m;
  pooled.design.term_names.reserve(terms.size());
  for (const TermSpec& term : terms) {
    pooled.design.term_names.push_back(render_term(term));
  }

  const auto p = static_cast<Eigen::Index>(terms.size());
  for (const Pool& pool : assignment.pools) {
    DesignStratum stratum;
    stratum.key = std::to_string(pool.pool_id);
    stratum.x = Eigen::MatrixXd::Zero(m + 1, p);
    for (const std::string& member : pool.members) {
      auto it = set_index.find(member);
      if (it == set_index.end()) {
        throw Error(Errc::kUnknownStratum,
                    "pool " + stratum.key + " references stratum '" + member +
                        "' which the cohort does not hold");
      }
      const MatchedSet& set = cohort.sets[it->second];
      std::vector<const Subject*> rows;
      rows.reserve(set.subjects.size());
      rows.push_back(&set.case_subject());
      for (const Subject* control : set.controls()) rows.push_back(control);
      for (std::size_t r = 0; r < rows.size(); ++r) {
        for (Eigen::Index c = 0; c < p; ++c) {
          try {
            stratum.x(static_cast<Eigen::Index>(r), c) +=
                evaluate_term(cohort, *rows[r], terms[c]);
          } catch (const Error& e) {
            if (e.code() == Errc::kDomainError) {
              throw Error(Errc::kDomainError,
                          std::string(e.what()) + " at node '" +
                              rows[r]->node_id + "', stratum '" +
                              set.stratum_id + "'");
            }
            throw;
          }
        }
      }
    }
    pooled.design.strata.push_back(std::move(stratum));
  }
  return pooled;
}

std::vector<RepeatResult> repeat_pooling(const Cohort& cohort,
                                         const PoolPlan& plan,
                                         const std::vector<TermSpec>& terms,
                                         int repeats, std::uint64_t base_seed,
                                         const FitOptions& opts) {
  if (repeats < 1) {
    throw Error(Errc::kConfigError, "repeat count must be at least 1");
  }
  std::vector<RepeatResult> results;
  results.reserve(static_cast<std::size_t>(repeats));
  for (int r = 1; r <= repeats; ++r) {
    RepeatResult result;
    result.seed = base_seed + static_cast<std::uint64_t>(r);
    try {
      const PoolAssignment assignment =
          assign_pools(cohort, plan, result.seed);
      const PooledDesign pooled = aggregate(cohort, assignment, terms);
      result.fit = fit(pooled.design, opts);
    } catch (const Error& e) {
      result.error = e.what();
    }
    results.push_back(std::move(result));
  }
  return results;
}

std::vector<std::string> plan_warnings(const PoolPlan& plan,
                                       const std::vector<TermSpec>& terms) {
  std::vector<std::string> warnings;
  int min_g = 0;
  int max_g = 0;
  for (const PoolBlock& block : plan.blocks) {
    if (min_g == 0 || block.pool_size < min_g) min_g = block.pool_size;
    max_g = std::max(max_g, block.pool_size);
  }
  const int degree = max_power_degree(terms);
  if (min_g != 0 && min_g <= degree) {
    warnings.push_back(
        "DisclosureWarning: pool size " + std::to_string(min_g) +
        " does not exceed the largest covariate power " +
        std::to_string(degree) +
        "; a recipient of the aggregates can solve for individual values");
  }
  if (max_g > 10) {
    warnings.push_back("BiasWarning: pool size " + std::to_string(max_g) +
                       " exceeds 10; estimates degrade noticeably beyond "
                       "that size");
  }
  return warnings;
}

nlohmann::json plan_to_json(const PoolPlan& plan) {
  nlohmann::json blocks = nlohmann::json::array();
  for (const PoolBlock& block : plan.blocks) {
    blocks.push_back({{"g", block.pool_size}, {"k", block.pool_count}});
  }
  return nlohmann::json{{"blocks", std::move(blocks)},
                        {"dropped", plan.dropped_sets},
                        {"policy", pool_policy_name(plan.policy)}};
}

nlohmann::json assignment_to_json(const PoolPlan& plan,
                                  const PoolAssignment& assignment) {
  nlohmann::json out = plan_to_json(plan);
  out["dropped"] = assignment.dropped;
  out["seed"] = assignment.seed;
  nlohmann::json pools = nlohmann::json::array();
  for (const Pool& pool : assignment.pools) {
    pools.push_back({{"id", pool.pool_id}, {"members", pool.members}});
  }
  out["pools"] = std::move(pools);
  if (!assignment.strata_labels.empty()) {
    out["labels"] = assignment.strata_labels;
  }
  return out;
}

}  // namespace poolclr
