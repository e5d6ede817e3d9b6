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

#ifndef POOLCLR_PROTOCOL_HPP_
#define POOLCLR_PROTOCOL_HPP_

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "poolclr/clr.hpp"
#include "poolclr/errors.hpp"
#include "poolclr/model.hpp"
#include "poolclr/network.hpp"
#include "poolclr/pooling.hpp"

namespace poolclr {

// A data-owning party: holds complete records for a disjoint subset of
// matched sets and answers protocol messages. Outbound messages carry only
// set counts, stratum ids, acknowledgments, or masked fixed-point partial
// sums; per-subject values never leave the shard.
class NodeActor : public Actor {
 public:
  NodeActor(std::string node_id, Cohort shard);

  const std::string& id() const override { return node_id_; }
  const Cohort& shard() const { return shard_; }
  std::vector<ProtocolMessage> on_message(
      const ProtocolMessage& message) override;

 private:
  struct Round {
    std::vector<TermSpec> terms;
  };

  ProtocolMessage error_reply(const ProtocolMessage& in, Errc code,
                              const std::string& detail) const;

  std::string node_id_;
  Cohort shard_;
  std::string center_id_;  // learned from the PLAN message
  int matching_ratio_ = 0;
  std::map<std::string, std::vector<std::string>> pool_members_;
  std::vector<std::string> ring_;
  std::map<std::string, Round> rounds_;  // keyed by "pool_id/arm"
};

struct EnumerationEntry {
  std::string node_id;
  int n_sets = 0;
  int matching_ratio = 0;
  std::vector<std::string> stratum_ids;
};

struct EnumerationSummary {
  std::vector<EnumerationEntry> per_node;
  int total_sets = 0;
  int matching_ratio = 0;
  std::vector<std::string> warnings;
};

struct ProtocolConfig {
  std::vector<TermSpec> terms;
  int pool_size = 5;
  PoolPolicy policy = PoolPolicy::kCoverAll;
  int secondary_min = 3;
  std::uint64_t seed = 0;
  FitOptions fit_options;
  std::string center_id = "ac";
};

struct ProtocolResult {
  FitResult fit;
  PooledDesign pooled;
  PoolPlan plan;
  PoolAssignment assignment;  // members are "node/stratum" keys
  EnumerationSummary enumeration;
};

// The coordinating party. It sees set counts, stratum ids, the pooling
// plan, and unmasked pool-level sums; it never sees a subject row.
class AnalyticalCenter {
 public:
  AnalyticalCenter(Network& network, ProtocolConfig config);

  // Step 1: collect per-node set counts and verify a uniform matching ratio.
  EnumerationSummary enumerate_sets();

  // Steps 2-3: send each node the plan rows that involve its own sets,
  // along with the ring order. Assignment members are "node/stratum" keys.
  void broadcast_plan(const PoolAssignment& assignment, int matching_ratio);

  // Step 4: one masked-ring summation round per (pool, arm); every node
  // contributes (a zero vector when it holds no member of the pool).
  PooledDesign collect_pooled(const PoolAssignment& assignment,
                              int matching_ratio);

  // Steps 1-5 end to end.
  ProtocolResult run();

 private:
  std::vector<double> secure_sum_round(const std::string& pool_id, int arm,
                                       std::size_t width);

  Network& network_;
  ProtocolConfig config_;
};

// Reference masked-ring summation over in-memory vectors: encodes each
// node's vector, adds them modulo 2^64 behind a uniform mask, unmasks, and
// decodes. The decoded sum is within 2^-21 * n_nodes of the exact real sum.
std::vector<double> secure_sum(
    const std::vector<std::vector<double>>& per_node_vectors,
    std::mt19937_64& mask_rng);

// Convenience wrapper: builds the network and actors, runs the analytical
// center, and returns the result plus the transcript via out-parameter.
ProtocolResult run_protocol(const std::vector<std::pair<std::string, Cohort>>&
                                shards,
                            const ProtocolConfig& config,
                            Transcript* transcript_out = nullptr);

// Audit scan of a serialized transcript: reports any payload key named
// subject_id/covariates, any payload key matching a shard covariate name,
// and any quoted subject-id value from the shards. Empty means clean.
std::vector<std::string> transcript_leak_findings(
    const Transcript& transcript,
    const std::vector<std::pair<std::string, Cohort>>& shards);

}  // namespace poolclr

#endif  // POOLCLR_PROTOCOL_HPP_
