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
#include <cstdlib>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <doctest.h>

#include "poolclr/codec.hpp"
#include "poolclr/csv.hpp"
#include "poolclr/design.hpp"
#include "poolclr/errors.hpp"
#include "poolclr/model.hpp"
#include "poolclr/pooling.hpp"
#include "poolclr/protocol.hpp"
#include "poolclr/rng.hpp"

namespace poolclr {
namespace {

std::string data_path(const std::string& name) {
  return std::string(POOLCLR_DATA_DIR) + "/" + name;
}

std::vector<std::pair<std::string, Cohort>> toy_shards() {
  std::vector<std::pair<std::string, Cohort>> shards;
  for (const char* node : {"blue", "green", "red"}) {
    const CohortCsv csv = read_cohort_csv_file(
        data_path(std::string("toy_nodes/") + node + ".csv"));
    shards.emplace_back(node,
                        validate_cohort(csv.covariate_names, csv.rows));
  }
  return shards;
}

std::vector<TermSpec> toy_terms() {
  return {parse_term_spec("log(age)"), parse_term_spec("gender"),
          parse_term_spec("marker")};
}

Cohort shard_union_in_ring_order(
    const std::vector<std::pair<std::string, Cohort>>& shards) {
  std::vector<RawRow> rows;
  const std::vector<std::string>& names = shards.front().second.covariate_names;
  for (const auto& [node, cohort] : shards) {
    for (const MatchedSet& set : cohort.sets) {
      for (const Subject& subject : set.subjects) {
        RawRow r;
        r.stratum_id = subject.stratum_id;
        r.node_id = subject.node_id;
        r.subject_id = subject.subject_id;
        r.outcome = subject.outcome;
        r.values = subject.values;
        rows.push_back(std::move(r));
      }
    }
  }
  return validate_cohort(names, rows);
}

Cohort random_shard(std::mt19937_64& engine, const std::string& node,
                    int n_sets, int m, int first_stratum) {
  std::uniform_real_distribution<double> value(0.5, 4.0);
  std::uniform_int_distribution<int> case_pos(0, m);
  std::vector<RawRow> rows;
  for (int s = 0; s < n_sets; ++s) {
    const int case_at = case_pos(engine);
    for (int j = 0; j <= m; ++j) {
      RawRow r;
      r.stratum_id = "st" + std::to_string(first_stratum + s);
      r.node_id = node;
      r.subject_id = node + "_" + std::to_string(s) + "_" + std::to_string(j);
      r.outcome = j == case_at ? 1 : 0;
      r.values = {value(engine), value(engine)};
      rows.push_back(std::move(r));
    }
  }
  return validate_cohort({"a", "b"}, rows);
}

TEST_CASE("secure_sum recovers small integer and fractional sums exactly") {
  std::mt19937_64 mask_rng = make_engine(9, {1});
  const std::vector<double> ints =
      secure_sum({{3.0}, {5.0}, {7.0}}, mask_rng);
  REQUIRE(ints.size() == 1);
  CHECK(ints[0] == 15.0);

  const std::vector<double> mixed =
      secure_sum({{0.5}, {-1.25}, {2.0}}, mask_rng);
  CHECK(mixed[0] == 1.25);

  const std::vector<double> single = secure_sum({{42.0}}, mask_rng);
  CHECK(single[0] == 42.0);
}

TEST_CASE("secure_sum error stays below the quantization bound") {
  std::mt19937_64 engine(402);
  std::mt19937_64 mask_rng = make_engine(402, {7});
  std::uniform_real_distribution<double> value(-1e5, 1e5);
  std::uniform_int_distribution<int> node_count(1, 8);
  for (int trial = 0; trial < 1000; ++trial) {
    const int nodes = node_count(engine);
    std::vector<std::vector<double>> vectors(nodes, std::vector<double>(3));
    std::vector<long double> exact(3, 0.0L);
    for (auto& vec : vectors) {
      for (int i = 0; i < 3; ++i) {
        vec[i] = value(engine);
        exact[i] += static_cast<long double>(vec[i]);
      }
    }
    const std::vector<double> sum = secure_sum(vectors, mask_rng);
    const double bound = std::ldexp(1.0, -21) * nodes;
    for (int i = 0; i < 3; ++i) {
      CHECK(std::abs(sum[i] - static_cast<double>(exact[i])) <= bound);
    }
  }
}

TEST_CASE("secure_sum rejects empty rings and ragged vectors") {
  std::mt19937_64 mask_rng = make_engine(1, {});
  CHECK_THROWS_AS(secure_sum({}, mask_rng), Error);
  try {
    std::mt19937_64 rng = make_engine(1, {});
    secure_sum({{1.0, 2.0}, {3.0}}, rng);
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::kDimensionMismatch);
  }
}

TEST_CASE("toy shards run the whole protocol and match the central path") {
  const auto shards = toy_shards();
  ProtocolConfig config;
  config.terms = {parse_term_spec("marker")};
  config.pool_size = 3;
  config.seed = 11;
  Transcript transcript;
  const ProtocolResult result = run_protocol(shards, config, &transcript);

  CHECK(result.enumeration.total_sets == 9);
  CHECK(result.enumeration.matching_ratio == 2);
  CHECK(result.plan.n_pools() == 3);
  REQUIRE(result.fit.converged);

  const Cohort central = shard_union_in_ring_order(shards);
  const PoolAssignment assignment = assign_pools(
      central, plan_pools(9, 3, PoolPolicy::kCoverAll), config.seed);
  const PooledDesign pooled = aggregate(central, assignment, config.terms);
  const FitResult central_fit = fit(pooled.design);
  REQUIRE(central_fit.converged);
  CHECK(std::abs(result.fit.beta[0] - central_fit.beta[0]) <= 1e-5);

  // The distributed pooled rows equal the centralized sums up to the
  // fixed-point quantization of each member contribution.
  REQUIRE(result.pooled.design.n_strata() == 3);
  for (std::size_t p = 0; p < 3; ++p) {
    const Eigen::MatrixXd& got = result.pooled.design.strata[p].x;
    const Eigen::MatrixXd& want = pooled.design.strata[p].x;
    CHECK((got - want).cwiseAbs().maxCoeff() <=
          std::ldexp(1.0, -21) * static_cast<double>(shards.size()));
  }
}

TEST_CASE("protocol on random shards matches the centralized fit") {
  std::mt19937_64 engine(404);
  std::uniform_int_distribution<int> node_count(2, 6);
  std::uniform_int_distribution<int> sets_per_node(3, 8);
  for (int trial = 0; trial < 5; ++trial) {
    const int nodes = node_count(engine);
    std::vector<std::pair<std::string, Cohort>> shards;
    int next_stratum = 0;
    for (int n = 0; n < nodes; ++n) {
      const std::string node = "node" + std::to_string(n);
      const int sets = sets_per_node(engine);
      shards.emplace_back(node,
                          random_shard(engine, node, sets, 2, next_stratum));
      next_stratum += sets;
    }
    ProtocolConfig config;
    config.terms = {parse_term_spec("a"), parse_term_spec("b")};
    config.pool_size = 2;
    config.policy = PoolPolicy::kDropRemainder;
    config.seed = 7000 + static_cast<std::uint64_t>(trial);
    const ProtocolResult result = run_protocol(shards, config);

    const Cohort central = shard_union_in_ring_order(shards);
    PoolPlan plan = plan_pools(static_cast<int>(central.n_sets()), 2,
                               PoolPolicy::kDropRemainder);
    const PoolAssignment assignment =
        assign_pools(central, plan, config.seed);
    const FitResult central_fit =
        fit(aggregate(central, assignment, config.terms).design);
    if (!central_fit.converged || !result.fit.converged) continue;
    for (int j = 0; j < 2; ++j) {
      CHECK(std::abs(result.fit.beta[j] - central_fit.beta[j]) <= 1e-5);
    }
  }
}

TEST_CASE("a single node still runs the full ring protocol") {
  std::mt19937_64 engine(405);
  std::vector<std::pair<std::string, Cohort>> shards;
  shards.emplace_back("solo", random_shard(engine, "solo", 8, 1, 0));
  ProtocolConfig config;
  config.terms = {parse_term_spec("a"), parse_term_spec("b")};
  config.pool_size = 2;
  config.seed = 31;
  const ProtocolResult result = run_protocol(shards, config);
  CHECK(result.enumeration.total_sets == 8);
  CHECK(result.plan.n_pools() == 4);
  const Cohort central = shard_union_in_ring_order(shards);
  const PoolAssignment assignment = assign_pools(
      central, plan_pools(8, 2, PoolPolicy::kCoverAll), config.seed);
  const FitResult central_fit =
      fit(aggregate(central, assignment, config.terms).design);
  for (int j = 0; j < 2; ++j) {
    CHECK(std::abs(result.fit.beta[j] - central_fit.beta[j]) <= 1e-5);
  }
}

TEST_CASE("every partial sum on the wire is masked") {
  const auto shards = toy_shards();
  ProtocolConfig config;
  config.terms = toy_terms();
  config.pool_size = 3;
  config.seed = 606;
  Transcript transcript;
  // The three-term toy fit is monotone after pooling; every exchange up to
  // and including the POOLED_ROW emissions is already in the transcript.
  try {
    run_protocol(shards, config, &transcript);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::kSeparationDetected);
  }

  // Rebuild each round's mask from the protocol's seed derivation and walk
  // the PARTIAL_SUM chain: the first hop must equal the mask itself, the
  // hops must follow the ring, and unmasking the hop returned to the center
  // must reproduce the POOLED_ROW emitted for that round.
  std::map<std::string, std::vector<const ProtocolMessage*>> chains;
  std::map<std::string, const ProtocolMessage*> pooled_rows;
  for (const ProtocolMessage& message : transcript.messages()) {
    if (message.kind == MessageKind::kPartialSum) {
      const std::string key =
          message.payload.at("pool_id").get<std::string>() + "/" +
          std::to_string(message.payload.at("arm").get<int>());
      chains[key].push_back(&message);
    } else if (message.kind == MessageKind::kPooledRow) {
      const std::string key =
          message.payload.at("pool_id").get<std::string>() + "/" +
          std::to_string(message.payload.at("arm").get<int>());
      pooled_rows[key] = &message;
    }
  }
  CHECK(chains.size() == 9);  // 3 pools x 3 arms
  REQUIRE(pooled_rows.size() == 9);

  int rounds_checked = 0;
  for (const auto& [key, hops] : chains) {
    REQUIRE(hops.size() == 4);  // center -> 3 ring nodes -> center
    CHECK(hops[0]->from == "ac");
    CHECK(hops[0]->to == "blue");
    CHECK(hops[1]->from == "blue");
    CHECK(hops[1]->to == "green");
    CHECK(hops[2]->from == "green");
    CHECK(hops[2]->to == "red");
    CHECK(hops[3]->from == "red");
    CHECK(hops[3]->to == "ac");

    const std::string pool_id = hops[0]->payload.at("pool_id");
    const int arm = hops[0]->payload.at("arm");
    const std::uint64_t pool_tag = std::stoull(pool_id);
    std::mt19937_64 mask_rng = make_engine(
        config.seed,
        {pool_tag, static_cast<std::uint64_t>(arm), 0x6d61736bULL});
    const auto& first_values = hops[0]->payload.at("values");
    const auto& last_values = hops[3]->payload.at("values");
    const auto& row_values = pooled_rows.at(key)->payload.at("values");
    REQUIRE(first_values.size() == config.terms.size());
    REQUIRE(last_values.size() == first_values.size());
    for (std::size_t i = 0; i < first_values.size(); ++i) {
      const std::uint64_t mask = mask_rng();
      const std::uint64_t masked_in =
          std::stoull(first_values[i].get<std::string>());
      const std::uint64_t masked_out =
          std::stoull(last_values[i].get<std::string>());
      CHECK(masked_in == mask);
      CHECK(FixedPointCodec::decode(masked_out - mask) ==
            row_values[i].get<double>());
    }
    ++rounds_checked;
  }
  CHECK(rounds_checked == 9);
}

TEST_CASE("the transcript carries no per-subject data") {
  const auto shards = toy_shards();
  ProtocolConfig config;
  config.terms = toy_terms();
  config.pool_size = 3;
  config.seed = 707;
  Transcript transcript;
  try {
    run_protocol(shards, config, &transcript);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::kSeparationDetected);
  }
  CHECK(transcript_leak_findings(transcript, shards).empty());

  // A deliberately corrupted transcript is flagged.
  Transcript tainted = transcript;
  ProtocolMessage leak;
  leak.kind = MessageKind::kError;
  leak.seq = 999;
  leak.from = "blue";
  leak.to = "ac";
  leak.payload = {{"subject_id", "9"}, {"covariates", {116.0, 82.0}}};
  tainted.append(leak);
  const std::vector<std::string> findings =
      transcript_leak_findings(tainted, shards);
  CHECK(findings.size() >= 2);

  Transcript value_leak = transcript;
  ProtocolMessage quoted;
  quoted.kind = MessageKind::kError;
  quoted.seq = 1000;
  quoted.from = "blue";
  quoted.to = "ac";
  quoted.payload = {{"message", "lookup failed"},
                    {"who", "subj14"}};
  value_leak.append(quoted);
  CHECK_FALSE(transcript_leak_findings(value_leak, shards).empty());
}

TEST_CASE("transcript lines are sequenced JSON objects") {
  const auto shards = toy_shards();
  ProtocolConfig config;
  config.terms = toy_terms();
  config.pool_size = 3;
  config.seed = 808;
  Transcript transcript;
  try {
    run_protocol(shards, config, &transcript);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::kSeparationDetected);
  }
  std::istringstream lines(transcript.to_jsonl());
  std::string line;
  std::uint64_t expected_seq = 0;
  int pooled_rows = 0;
  bool saw_enumerate_first = false;
  while (std::getline(lines, line)) {
    const nlohmann::json j = nlohmann::json::parse(line);
    CHECK(j.at("seq") == expected_seq);
    if (expected_seq == 0) {
      saw_enumerate_first = j.at("kind") == "ENUMERATE_REQ";
    }
    if (j.at("kind") == "POOLED_ROW") {
      ++pooled_rows;
      CHECK(j.at("from") == "ac");
      CHECK(j.at("to") == "ac");
    }
    ++expected_seq;
  }
  CHECK(saw_enumerate_first);
  CHECK(pooled_rows == 9);
}

TEST_CASE("nodes with different matching ratios abort enumeration") {
  std::mt19937_64 engine(406);
  std::vector<std::pair<std::string, Cohort>> shards;
  shards.emplace_back("one", random_shard(engine, "one", 4, 1, 0));
  shards.emplace_back("two", random_shard(engine, "two", 4, 2, 4));
  ProtocolConfig config;
  config.terms = {parse_term_spec("a")};
  config.pool_size = 2;
  config.seed = 1;
  try {
    run_protocol(shards, config);
    FAIL("expected MatchingRatioMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::kMatchingRatioMismatch);
    CHECK(std::string(e.what()).find("two") != std::string::npos);
  }
}

TEST_CASE("an empty shard draws a warning but stays in the ring") {
  std::mt19937_64 engine(407);
  std::vector<std::pair<std::string, Cohort>> shards;
  shards.emplace_back("data", random_shard(engine, "data", 6, 1, 0));
  shards.emplace_back("empty", validate_cohort({"a", "b"}, {}));
  ProtocolConfig config;
  config.terms = {parse_term_spec("a"), parse_term_spec("b")};
  config.pool_size = 2;
  config.seed = 92;
  Transcript transcript;
  const ProtocolResult result = run_protocol(shards, config, &transcript);
  CHECK(result.enumeration.total_sets == 6);
  REQUIRE_FALSE(result.enumeration.warnings.empty());
  CHECK(result.enumeration.warnings[0].find("empty") != std::string::npos);
  bool empty_node_forwarded = false;
  for (const ProtocolMessage& message : transcript.messages()) {
    if (message.kind == MessageKind::kPartialSum && message.from == "empty") {
      empty_node_forwarded = true;
    }
  }
  CHECK(empty_node_forwarded);
}

TEST_CASE("covariates beyond the fixed-point range abort without echoing") {
  std::mt19937_64 engine(408);
  Cohort shard = random_shard(engine, "big", 4, 1, 0);
  shard.sets[0].subjects[0].values[0] = 8796093022208.0;  // 2^43
  std::vector<std::pair<std::string, Cohort>> shards;
  shards.emplace_back("big", std::move(shard));
  ProtocolConfig config;
  config.terms = {parse_term_spec("a"), parse_term_spec("b")};
  config.pool_size = 2;
  config.seed = 15;
  Transcript transcript;
  try {
    run_protocol(shards, config, &transcript);
    FAIL("expected RangeExceeded");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::kRangeExceeded);
    CHECK(std::string(e.what()).find("8796093022208") == std::string::npos);
  }
  for (const ProtocolMessage& message : transcript.messages()) {
    CHECK(message.payload.dump().find("8796093022208") == std::string::npos);
  }
}

TEST_CASE("infeasible plans surface with the planning stage tag") {
  std::mt19937_64 engine(409);
  std::vector<std::pair<std::string, Cohort>> shards;
  shards.emplace_back("tiny", random_shard(engine, "tiny", 3, 1, 0));
  ProtocolConfig config;
  config.terms = {parse_term_spec("a")};
  config.pool_size = 5;
  config.seed = 2;
  try {
    run_protocol(shards, config);
    FAIL("expected Infeasible");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::kInfeasible);
    CHECK(std::string(e.what()).find("stage plan") != std::string::npos);
  }
}

TEST_CASE("sending to an unregistered actor is NodeUnreachable") {
  Network network("ac");
  std::mt19937_64 engine(410);
  NodeActor node("present", random_shard(engine, "present", 2, 1, 0));
  network.register_actor(&node);
  CHECK_THROWS_AS(
      network.send_from_center(MessageKind::kEnumerateReq, "absent", {}),
      Error);
}

TEST_CASE("duplicate node ids cannot join the network") {
  Network network("ac");
  std::mt19937_64 engine(411);
  NodeActor a("twin", random_shard(engine, "twin", 2, 1, 0));
  NodeActor b("twin", random_shard(engine, "twin", 2, 1, 10));
  network.register_actor(&a);
  CHECK_THROWS_AS(network.register_actor(&b), Error);
  NodeActor center_clash("ac", random_shard(engine, "ac", 2, 1, 20));
  CHECK_THROWS_AS(network.register_actor(&center_clash), Error);
}

TEST_CASE("a plan naming a stratum the node does not hold is rejected") {
  std::mt19937_64 engine(412);
  Network network("ac");
  NodeActor node("n0", random_shard(engine, "n0", 3, 1, 0));
  network.register_actor(&node);
  ProtocolConfig config;
  config.terms = {parse_term_spec("a")};
  config.pool_size = 3;
  config.seed = 3;
  AnalyticalCenter center(network, config);
  center.enumerate_sets();
  PoolAssignment assignment;
  assignment.pools = {Pool{1, {"n0/st0", "n0/st1", "n0/ghost"}}};
  try {
    center.broadcast_plan(assignment, 1);
    FAIL("expected UnknownStratum");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::kUnknownStratum);
    CHECK(std::string(e.what()).find("ghost") != std::string::npos);
  }
}

TEST_CASE("run_protocol preserves the transcript when a stage throws") {
  std::mt19937_64 engine(413);
  std::vector<std::pair<std::string, Cohort>> shards;
  shards.emplace_back("one", random_shard(engine, "one", 4, 1, 0));
  shards.emplace_back("two", random_shard(engine, "two", 4, 2, 4));
  ProtocolConfig config;
  config.terms = {parse_term_spec("a")};
  config.pool_size = 2;
  config.seed = 4;
  Transcript transcript;
  CHECK_THROWS_AS(run_protocol(shards, config, &transcript), Error);
  CHECK_FALSE(transcript.messages().empty());
}

}  // namespace
}  // namespace poolclr
