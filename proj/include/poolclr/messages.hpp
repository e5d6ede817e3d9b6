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

#ifndef POOLCLR_MESSAGES_HPP_
#define POOLCLR_MESSAGES_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace poolclr {

enum class MessageKind {
  kEnumerateReq,
  kEnumerateResp,
  kPlan,
  kAggRequest,
  kPartialSum,
  kPooledRow,
  kError,
};

const char* message_kind_name(MessageKind kind);  // e.g. "PARTIAL_SUM"

// Typed envelope exchanged between node actors and the analytical center.
// PARTIAL_SUM payloads carry only masked fixed-point residues (rendered as
// decimal strings, bit-exact); raw real-valued covariate data appears only
// in POOLED_ROW messages, which the analytical center emits after unmasking
// a completed pool sum.
struct ProtocolMessage {
  MessageKind kind = MessageKind::kError;
  std::uint64_t seq = 0;
  std::string from;
  std::string to;
  nlohmann::json payload;
};

nlohmann::json message_to_json(const ProtocolMessage& message);

// Append-only audit log of every message the network carried.
class Transcript {
 public:
  void append(const ProtocolMessage& message) { messages_.push_back(message); }
  const std::vector<ProtocolMessage>& messages() const { return messages_; }

  // One JSON object per line: {kind, seq, from, to, payload}.
  void write_jsonl(std::ostream& out) const;
  std::string to_jsonl() const;

 private:
  std::vector<ProtocolMessage> messages_;
};

}  // namespace poolclr

#endif  // POOLCLR_MESSAGES_HPP_
