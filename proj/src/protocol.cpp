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

#include "poolclr/protocol.hpp"

#include <algorithm>
#include <charconv>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include "poolclr/codec.hpp"
#include "poolclr/errors.hpp"
#include "poolclr/rng.hpp"

namespace poolclr {
namespace {

// Tag separating mask streams from every other consumer of the run seed.
constexpr std::uint64_t kMaskStreamTag = 0x6d61736bULL;

std::string round_key(const std::string& pool_id, int arm) {
  return pool_id + "/" + std::to_string(arm);
}

std::uint64_t parse_residue(const std::string& text) {
  std::uint64_t value = 0;
  auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw Error(Errc::kParseError,
                "partial-sum residue '" + text + "' is not a decimal uint64");
  }
  return value;
}

nlohmann::json residues_to_json(const std::vector<std::uint64_t>& residues) {
  nlohmann::json out = nlohmann::json::array();
  for (std::uint64_t r : residues) out.push_back(std::to_string(r));
  return out;
}

std::vector<std::uint64_t> residues_from_json(const nlohmann::json& values) {
  std::vector<std::uint64_t> out;
  out.reserve(values.size());
  for (const auto& v : values) out.push_back(parse_residue(v.get<std::string>()));
  return out;
}

Errc errc_from_name(const std::string& name) {
  static const std::unordered_map<std::string, Errc> kNames = {
      {"UnknownStratum", Errc::kUnknownStratum},
      {"RangeExceeded", Errc::kRangeExceeded},
      {"RingBroken", Errc::kRingBroken},
      {"MatchingRatioMismatch", Errc::kMatchingRatioMismatch},
      {"NodeUnreachable", Errc::kNodeUnreachable},
      {"PlanMismatch", Errc::kPlanMismatch},
      {"DomainError", Errc::kDomainError},
      {"UnknownVariable", Errc::kUnknownVariable},
      {"ParseError", Errc::kParseError},
  };
  auto it = kNames.find(name);
  return it == kNames.end() ? Errc::kConfigError : it->second;
}

// Strips the "Name: " prefix Error's constructor adds, so a message can be
// re-annotated without stacking prefixes.
std::string strip_errc_prefix(const Error& e) {
  const std::string prefix = std::string(errc_name(e.code())) + ": ";
  std::string text = e.what();
  if (text.rfind(prefix, 0) == 0) text.erase(0, prefix.size());
  return text;
}

template <typename Fn>
auto with_stage(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.code(),
                std::string("stage ") + stage + ": " + strip_errc_prefix(e));
  }
}

void throw_error_reply(const ProtocolMessage& message) {
  const std::string code = message.payload.value("code", "ConfigError");
  const std::string detail = message.payload.value("message", "");
  throw Error(errc_from_name(code),
              "node '" + message.from + "' replied: " + detail);
}

const ProtocolMessage* find_kind(const std::vector<ProtocolMessage>& messages,
                                 MessageKind kind) {
  for (const ProtocolMessage& m : messages) {
    if (m.kind == kind) return &m;
  }
  return nullptr;
}

}  // namespace

const char* message_kind_name(MessageKind kind) {
  switch (kind) {
    case MessageKind::kEnumerateReq: return "ENUMERATE_REQ";
    case MessageKind::kEnumerateResp: return "ENUMERATE_RESP";
    case MessageKind::kPlan: return "PLAN";
    case MessageKind::kAggRequest: return "AGG_REQUEST";
    case MessageKind::kPartialSum: return "PARTIAL_SUM";
    case MessageKind::kPooledRow: return "POOLED_ROW";
    case MessageKind::kError: return "ERROR";
  }
  return "ERROR";
}

nlohmann::json message_to_json(const ProtocolMessage& message) {
  return nlohmann::json{{"kind", message_kind_name(message.kind)},
                        {"seq", message.seq},
                        {"from", message.from},
                        {"to", message.to},
                        {"payload", message.payload}};
}

void Transcript::write_jsonl(std::ostream& out) const {
  for (const ProtocolMessage& message : messages_) {
    out << message_to_json(message).dump() << '\n';
  }
}

std::string Transcript::to_jsonl() const {
  std::ostringstream out;
  write_jsonl(out);
  return out.str();
}

void Network::register_actor(Actor* actor) {
  if (actor->id() == center_id_) {
    throw Error(Errc::kConfigError, "node id '" + actor->id() +
                                        "' collides with the analytical "
                                        "center id");
  }
  if (!actors_.emplace(actor->id(), actor).second) {
    throw Error(Errc::kConfigError,
                "node id '" + actor->id() + "' registered twice");
  }
}

std::vector<std::string> Network::ring() const {
  std::vector<std::string> ids;
  ids.reserve(actors_.size());
  for (const auto& [id, actor] : actors_) ids.push_back(id);
  return ids;
}

std::vector<ProtocolMessage> Network::send_from_center(
    MessageKind kind, const std::string& to, nlohmann::json payload) {
  std::deque<ProtocolMessage> queue;
  queue.push_back(ProtocolMessage{kind, next_seq_++, center_id_, to,
                                  std::move(payload)});

  std::vector<ProtocolMessage> arrived;
  while (!queue.empty()) {
    ProtocolMessage message = std::move(queue.front());
    queue.pop_front();
    transcript_.append(message);
    if (message.to == center_id_) {
      arrived.push_back(std::move(message));
      continue;
    }
    auto it = actors_.find(message.to);
    if (it == actors_.end()) {
      throw Error(Errc::kNodeUnreachable,
                  "no node '" + message.to + "' is registered");
    }
    std::vector<ProtocolMessage> replies = it->second->on_message(message);
    for (ProtocolMessage& reply : replies) {
      reply.seq = next_seq_++;
      queue.push_back(std::move(reply));
    }
  }
  return arrived;
}

NodeActor::NodeActor(std::string node_id, Cohort shard)
    : node_id_(std::move(node_id)), shard_(std::move(shard)) {}

ProtocolMessage NodeActor::error_reply(const ProtocolMessage& in, Errc code,
                                       const std::string& detail) const {
  ProtocolMessage out;
  out.kind = MessageKind::kError;
  out.from = node_id_;
  out.to = center_id_.empty() ? in.from : center_id_;
  out.payload = {{"code", errc_name(code)}, {"message", detail}};
  return out;
}

std::vector<ProtocolMessage> NodeActor::on_message(
    const ProtocolMessage& message) {
  switch (message.kind) {
    case MessageKind::kEnumerateReq: {
      std::set<int> ratios;
      nlohmann::json stratum_ids = nlohmann::json::array();
      for (const MatchedSet& set : shard_.sets) {
        ratios.insert(set.matching_ratio);
        stratum_ids.push_back(set.stratum_id);
      }
      ProtocolMessage reply;
      reply.kind = MessageKind::kEnumerateResp;
      reply.from = node_id_;
      reply.to = message.from;
      reply.payload = {{"n_sets", shard_.sets.size()},
                       {"matching_ratios",
                        std::vector<int>(ratios.begin(), ratios.end())},
                       {"stratum_ids", std::move(stratum_ids)}};
      return {std::move(reply)};
    }

    case MessageKind::kPlan: {
      center_id_ = message.from;
      matching_ratio_ = message.payload.value("matching_ratio", 0);
      ring_ = message.payload.value("ring", std::vector<std::string>{});

      std::unordered_set<std::string> held;
      for (const MatchedSet& set : shard_.sets) held.insert(set.stratum_id);

      std::map<std::string, std::vector<std::string>> members;
      for (const auto& pool : message.payload.value("pools",
                                                    nlohmann::json::array())) {
        const std::string pool_id =
            std::to_string(pool.value("id", 0));
        for (const auto& member : pool.value("members",
                                             std::vector<std::string>{})) {
          if (held.count(member) == 0) {
            return {error_reply(message, Errc::kUnknownStratum,
                                "plan references stratum '" + member +
                                    "' which node '" + node_id_ +
                                    "' does not hold")};
          }
          members[pool_id].push_back(member);
        }
      }
      pool_members_ = std::move(members);

      nlohmann::json contributions = nlohmann::json::object();
      for (const auto& [pool_id, locals] : pool_members_) {
        contributions[pool_id] = locals.size();
      }
      ProtocolMessage ack;
      ack.kind = MessageKind::kPlan;
      ack.from = node_id_;
      ack.to = message.from;
      ack.payload = {{"ack", true}, {"contributions", std::move(contributions)}};
      return {std::move(ack)};
    }

    case MessageKind::kAggRequest: {
      const std::string pool_id = message.payload.value("pool_id", "");
      const int arm = message.payload.value("arm", -1);
      Round round;
      try {
        for (const auto& text : message.payload.value(
                 "terms", std::vector<std::string>{})) {
          round.terms.push_back(parse_term_spec(text));
        }
      } catch (const Error& e) {
        return {error_reply(message, e.code(), strip_errc_prefix(e))};
      }
      if (pool_id.empty() || arm < 0 || round.terms.empty()) {
        return {error_reply(message, Errc::kPlanMismatch,
                            "aggregation request is missing pool_id, arm, or "
                            "terms")};
      }
      rounds_[round_key(pool_id, arm)] = std::move(round);
      return {};
    }

    case MessageKind::kPartialSum: {
      const std::string pool_id = message.payload.value("pool_id", "");
      const int arm = message.payload.value("arm", -1);
      auto round_it = rounds_.find(round_key(pool_id, arm));
      if (round_it == rounds_.end()) {
        return {error_reply(message, Errc::kRingBroken,
                            "partial sum for unannounced round pool " +
                                pool_id + " arm " + std::to_string(arm))};
      }
      const std::vector<TermSpec>& terms = round_it->second.terms;

      std::vector<std::uint64_t> residues;
      try {
        residues = residues_from_json(
            message.payload.value("values", nlohmann::json::array()));
      } catch (const Error& e) {
        return {error_reply(message, e.code(), strip_errc_prefix(e))};
      }
      if (residues.size() != terms.size()) {
        return {error_reply(message, Errc::kDimensionMismatch,
                            "partial sum carries " +
                                std::to_string(residues.size()) +
                                " residues; " + std::to_string(terms.size()) +
                                " terms in this round")};
      }

      // This node's real-valued contribution: the sum over its member sets
      // of the requested arm's term values (empty membership adds zero).
      std::vector<double> contribution(terms.size(), 0.0);
      auto members_it = pool_members_.find(pool_id);
      if (members_it != pool_members_.end()) {
        for (const std::string& member : members_it->second) {
          const MatchedSet* set = nullptr;
          for (const MatchedSet& candidate : shard_.sets) {
            if (candidate.stratum_id == member) {
              set = &candidate;
              break;
            }
          }
          if (set == nullptr) {
            return {error_reply(message, Errc::kUnknownStratum,
                                "round references stratum '" + member +
                                    "' which node '" + node_id_ +
                                    "' does not hold")};
          }
          const Subject* subject = nullptr;
          if (arm == 0) {
            subject = &set->case_subject();
          } else {
            const std::vector<const Subject*> controls = set->controls();
            if (static_cast<std::size_t>(arm) > controls.size()) {
              return {error_reply(message, Errc::kPlanMismatch,
                                  "arm " + std::to_string(arm) +
                                      " exceeds the matching ratio of "
                                      "stratum '" +
                                      member + "'")};
            }
            subject = controls[static_cast<std::size_t>(arm) - 1];
          }
          for (std::size_t t = 0; t < terms.size(); ++t) {
            try {
              contribution[t] += evaluate_term(shard_, *subject, terms[t]);
            } catch (const Error& e) {
              return {error_reply(message, e.code(),
                                  strip_errc_prefix(e) + " at node '" +
                                      node_id_ + "', stratum '" + member +
                                      "'")};
            }
          }
        }
      }

      for (std::size_t t = 0; t < terms.size(); ++t) {
        std::uint64_t encoded = 0;
        try {
          encoded = FixedPointCodec::encode(contribution[t]);
        } catch (const Error& e) {
          if (e.code() == Errc::kRangeExceeded) {
            return {error_reply(
                message, Errc::kRangeExceeded,
                "contribution to pool " + pool_id + " arm " +
                    std::to_string(arm) + " exceeds the fixed-point range "
                    "at node '" + node_id_ + "'")};
          }
          return {error_reply(message, e.code(), strip_errc_prefix(e))};
        }
        residues[t] += encoded;  // modulo 2^64 by unsigned wraparound
      }

      auto self = std::find(ring_.begin(), ring_.end(), node_id_);
      if (self == ring_.end()) {
        return {error_reply(message, Errc::kRingBroken,
                            "node '" + node_id_ + "' is not in the ring")};
      }
      ProtocolMessage forward;
      forward.kind = MessageKind::kPartialSum;
      forward.from = node_id_;
      forward.to = (self + 1 == ring_.end()) ? center_id_ : *(self + 1);
      forward.payload = {{"pool_id", pool_id},
                         {"arm", arm},
                         {"values", residues_to_json(residues)}};
      return {std::move(forward)};
    }

    default:
      return {error_reply(message, Errc::kConfigError,
                          std::string("unexpected message kind ") +
                              message_kind_name(message.kind))};
  }
}

AnalyticalCenter::AnalyticalCenter(Network& network, ProtocolConfig config)
    : network_(network), config_(std::move(config)) {
  if (config_.terms.empty()) {
    throw Error(Errc::kConfigError, "no model terms configured");
  }
  if (config_.pool_size < 1) {
    throw Error(Errc::kInvalidPoolsize,
                "pool size must be at least 1 (got " +
                    std::to_string(config_.pool_size) + ")");
  }
}

EnumerationSummary AnalyticalCenter::enumerate_sets() {
  return with_stage("enumerate", [&]() {
    const std::vector<std::string> ring = network_.ring();
    if (ring.empty()) {
      throw Error(Errc::kNodeUnreachable, "no nodes are registered");
    }

    EnumerationSummary summary;
    for (const std::string& node : ring) {
      std::vector<ProtocolMessage> arrived = network_.send_from_center(
          MessageKind::kEnumerateReq, node, nlohmann::json::object());
      if (const ProtocolMessage* error = find_kind(arrived,
                                                   MessageKind::kError)) {
        throw_error_reply(*error);
      }
      const ProtocolMessage* resp =
          find_kind(arrived, MessageKind::kEnumerateResp);
      if (resp == nullptr || resp->from != node) {
        throw Error(Errc::kNodeUnreachable,
                    "node '" + node + "' did not answer enumeration");
      }

      EnumerationEntry entry;
      entry.node_id = node;
      entry.n_sets = resp->payload.value("n_sets", 0);
      entry.stratum_ids =
          resp->payload.value("stratum_ids", std::vector<std::string>{});
      const std::vector<int> ratios =
          resp->payload.value("matching_ratios", std::vector<int>{});
      if (ratios.size() > 1) {
        std::string listed;
        for (int r : ratios) {
          if (!listed.empty()) listed += ", ";
          listed += std::to_string(r);
        }
        throw Error(Errc::kMatchingRatioMismatch,
                    "node '" + node + "' mixes matching ratios {" + listed +
                        "}");
      }
      entry.matching_ratio = ratios.empty() ? 0 : ratios.front();
      summary.total_sets += entry.n_sets;
      if (entry.n_sets == 0) {
        summary.warnings.push_back("node '" + node +
                                   "' reports 0 matched sets; it stays in "
                                   "the ring and contributes zero vectors");
      } else if (summary.matching_ratio == 0) {
        summary.matching_ratio = entry.matching_ratio;
      } else if (entry.matching_ratio != summary.matching_ratio) {
        throw Error(Errc::kMatchingRatioMismatch,
                    "node '" + node + "' reports matching ratio 1:" +
                        std::to_string(entry.matching_ratio) +
                        "; earlier nodes reported 1:" +
                        std::to_string(summary.matching_ratio));
      }
      summary.per_node.push_back(std::move(entry));
    }
    return summary;
  });
}

void AnalyticalCenter::broadcast_plan(const PoolAssignment& assignment,
                                      int matching_ratio) {
  with_stage("plan", [&]() {
    const std::vector<std::string> ring = network_.ring();
    const nlohmann::json ring_json = ring;

    for (const std::string& node : ring) {
      const std::string prefix = node + "/";
      nlohmann::json pools = nlohmann::json::array();
      for (const Pool& pool : assignment.pools) {
        nlohmann::json members = nlohmann::json::array();
        for (const std::string& member : pool.members) {
          if (member.rfind(prefix, 0) == 0) {
            members.push_back(member.substr(prefix.size()));
          }
        }
        if (!members.empty()) {
          pools.push_back({{"id", pool.pool_id},
                           {"members", std::move(members)}});
        }
      }
      std::vector<ProtocolMessage> arrived = network_.send_from_center(
          MessageKind::kPlan, node,
          nlohmann::json{{"pools", std::move(pools)},
                         {"ring", ring_json},
                         {"matching_ratio", matching_ratio}});
      if (const ProtocolMessage* error = find_kind(arrived,
                                                   MessageKind::kError)) {
        throw_error_reply(*error);
      }
      const ProtocolMessage* ack = find_kind(arrived, MessageKind::kPlan);
      if (ack == nullptr || !ack->payload.value("ack", false)) {
        throw Error(Errc::kNodeUnreachable,
                    "node '" + node + "' did not acknowledge the plan");
      }
    }
    return 0;
  });
}

std::vector<double> AnalyticalCenter::secure_sum_round(
    const std::string& pool_id, int arm, std::size_t width) {
  const std::vector<std::string> ring = network_.ring();
  if (ring.empty()) {
    throw Error(Errc::kRingBroken, "no nodes are registered");
  }

  nlohmann::json terms = nlohmann::json::array();
  for (const TermSpec& term : config_.terms) terms.push_back(render_term(term));
  for (const std::string& node : ring) {
    std::vector<ProtocolMessage> arrived = network_.send_from_center(
        MessageKind::kAggRequest, node,
        nlohmann::json{{"pool_id", pool_id}, {"arm", arm}, {"terms", terms}});
    if (const ProtocolMessage* error = find_kind(arrived,
                                                 MessageKind::kError)) {
      throw_error_reply(*error);
    }
  }

  std::uint64_t pool_tag = 0;
  auto [ptr, ec] = std::from_chars(pool_id.data(),
                                   pool_id.data() + pool_id.size(), pool_tag);
  if (ec != std::errc{} || ptr != pool_id.data() + pool_id.size()) {
    throw Error(Errc::kConfigError, "pool id '" + pool_id +
                                        "' is not numeric");
  }
  std::mt19937_64 mask_rng = make_engine(
      config_.seed, {pool_tag, static_cast<std::uint64_t>(arm),
                     kMaskStreamTag});
  std::vector<std::uint64_t> mask(width);
  for (std::uint64_t& r : mask) r = mask_rng();

  std::vector<ProtocolMessage> arrived = network_.send_from_center(
      MessageKind::kPartialSum, ring.front(),
      nlohmann::json{{"pool_id", pool_id},
                     {"arm", arm},
                     {"values", residues_to_json(mask)}});
  if (const ProtocolMessage* error = find_kind(arrived, MessageKind::kError)) {
    throw_error_reply(*error);
  }
  const ProtocolMessage* final_sum =
      find_kind(arrived, MessageKind::kPartialSum);
  if (final_sum == nullptr) {
    throw Error(Errc::kRingBroken,
                "the masked partial sum for pool " + pool_id + " arm " +
                    std::to_string(arm) + " never returned");
  }
  std::vector<std::uint64_t> residues = residues_from_json(
      final_sum->payload.value("values", nlohmann::json::array()));
  if (residues.size() != width) {
    throw Error(Errc::kRingBroken,
                "masked sum width changed in flight for pool " + pool_id);
  }

  std::vector<double> decoded(width);
  for (std::size_t i = 0; i < width; ++i) {
    decoded[i] = FixedPointCodec::decode(residues[i] - mask[i]);
  }
  return decoded;
}

PooledDesign AnalyticalCenter::collect_pooled(const PoolAssignment& assignment,
                                              int matching_ratio) {
  return with_stage("collect", [&]() {
    const std::size_t width = config_.terms.size();

    PooledDesign pooled;
    pooled.terms = config_.terms;
    pooled.matching_ratio = matching_ratio;
    for (const TermSpec& term : config_.terms) {
      pooled.design.term_names.push_back(render_term(term));
    }

    for (const Pool& pool : assignment.pools) {
      const std::string pool_id = std::to_string(pool.pool_id);
      DesignStratum stratum;
      stratum.key = pool_id;
      stratum.x.resize(matching_ratio + 1,
                       static_cast<Eigen::Index>(width));
      for (int arm = 0; arm <= matching_ratio; ++arm) {
        std::vector<double> row;
        try {
          row = secure_sum_round(pool_id, arm, width);
        } catch (const Error& e) {
          throw Error(e.code(), "pool " + pool_id + ": " +
                                    strip_errc_prefix(e));
        }
        for (std::size_t c = 0; c < width; ++c) {
          stratum.x(arm, static_cast<Eigen::Index>(c)) = row[c];
        }
        network_.send_from_center(
            MessageKind::kPooledRow, network_.center_id(),
            nlohmann::json{{"pool_id", pool_id},
                           {"arm", arm},
                           {"values", row}});
      }
      pooled.design.strata.push_back(std::move(stratum));
    }
    return pooled;
  });
}

ProtocolResult AnalyticalCenter::run() {
  ProtocolResult result;
  result.enumeration = enumerate_sets();

  with_stage("plan", [&]() {
    if (config_.pool_size == 1) {
      result.plan.blocks = {PoolBlock{1, result.enumeration.total_sets}};
      result.plan.policy = config_.policy;
    } else {
      result.plan = plan_pools(result.enumeration.total_sets,
                               config_.pool_size, config_.policy,
                               config_.secondary_min);
    }
    result.plan.matching_ratio = result.enumeration.matching_ratio;

    std::vector<std::string> keys;
    keys.reserve(static_cast<std::size_t>(result.enumeration.total_sets));
    for (const EnumerationEntry& entry : result.enumeration.per_node) {
      for (const std::string& stratum : entry.stratum_ids) {
        keys.push_back(entry.node_id + "/" + stratum);
      }
    }
    result.assignment = assign_pool_keys(keys, result.plan, config_.seed);
    return 0;
  });

  broadcast_plan(result.assignment, result.enumeration.matching_ratio);
  result.pooled =
      collect_pooled(result.assignment, result.enumeration.matching_ratio);
  result.fit = with_stage(
      "fit", [&]() { return fit(result.pooled.design, config_.fit_options); });
  return result;
}

std::vector<double> secure_sum(
    const std::vector<std::vector<double>>& per_node_vectors,
    std::mt19937_64& mask_rng) {
  if (per_node_vectors.empty()) {
    throw Error(Errc::kRingBroken, "no node vectors to sum");
  }
  const std::size_t width = per_node_vectors.front().size();
  for (const auto& vec : per_node_vectors) {
    if (vec.size() != width) {
      throw Error(Errc::kDimensionMismatch,
                  "node vectors differ in width");
    }
  }

  std::vector<std::uint64_t> mask(width);
  for (std::uint64_t& r : mask) r = mask_rng();

  std::vector<std::uint64_t> running = mask;
  for (const auto& vec : per_node_vectors) {
    for (std::size_t i = 0; i < width; ++i) {
      running[i] += FixedPointCodec::encode(vec[i]);
    }
  }

  std::vector<double> out(width);
  for (std::size_t i = 0; i < width; ++i) {
    out[i] = FixedPointCodec::decode(running[i] - mask[i]);
  }
  return out;
}

ProtocolResult run_protocol(
    const std::vector<std::pair<std::string, Cohort>>& shards,
    const ProtocolConfig& config, Transcript* transcript_out) {
  Network network(config.center_id);
  std::vector<std::unique_ptr<NodeActor>> actors;
  actors.reserve(shards.size());
  for (const auto& [node_id, shard] : shards) {
    actors.push_back(std::make_unique<NodeActor>(node_id, shard));
    network.register_actor(actors.back().get());
  }

  AnalyticalCenter center(network, config);
  try {
    ProtocolResult result = center.run();
    if (transcript_out != nullptr) *transcript_out = network.transcript();
    return result;
  } catch (...) {
    if (transcript_out != nullptr) *transcript_out = network.transcript();
    throw;
  }
}

std::vector<std::string> transcript_leak_findings(
    const Transcript& transcript,
    const std::vector<std::pair<std::string, Cohort>>& shards) {
  std::unordered_set<std::string> forbidden_keys = {"subject_id",
                                                    "subject_ids",
                                                    "covariates"};
  std::unordered_set<std::string> subject_ids;
  for (const auto& [node_id, shard] : shards) {
    for (const std::string& name : shard.covariate_names) {
      forbidden_keys.insert(name);
    }
    for (const MatchedSet& set : shard.sets) {
      for (const Subject& subject : set.subjects) {
        subject_ids.insert(subject.subject_id);
      }
    }
  }

  std::vector<std::string> findings;
  for (const ProtocolMessage& message : transcript.messages()) {
    const std::string label = std::string(message_kind_name(message.kind)) +
                              " seq " + std::to_string(message.seq);

    // Walk the payload tree: flag forbidden object keys and any string value
    // equal to a subject id.
    std::vector<const nlohmann::json*> stack = {&message.payload};
    while (!stack.empty()) {
      const nlohmann::json* node = stack.back();
      stack.pop_back();
      if (node->is_object()) {
        for (auto it = node->begin(); it != node->end(); ++it) {
          if (forbidden_keys.count(it.key()) > 0) {
            findings.push_back(label + " carries payload key '" + it.key() +
                               "'");
          }
          stack.push_back(&it.value());
        }
      } else if (node->is_array()) {
        for (const auto& item : *node) stack.push_back(&item);
      } else if (node->is_string()) {
        const auto value = node->get<std::string>();
        if (subject_ids.count(value) > 0) {
          findings.push_back(label + " carries subject id '" + value + "'");
        }
      }
    }
  }
  return findings;
}

}  // namespace poolclr
