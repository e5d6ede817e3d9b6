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

#ifndef POOLCLR_NETWORK_HPP_
#define POOLCLR_NETWORK_HPP_

#include <cstdint>
#include <deque>
#include <map>
#include <string>
#include <vector>

#include "poolclr/messages.hpp"

namespace poolclr {

// A party that receives messages and may emit replies. Actors never share
// state; everything crosses through ProtocolMessage envelopes.
class Actor {
 public:
  virtual ~Actor() = default;
  virtual const std::string& id() const = 0;
  virtual std::vector<ProtocolMessage> on_message(
      const ProtocolMessage& message) = 0;
};

// In-process ordered, reliable transport. Every sent message is sequenced
// and appended to the transcript before delivery, so the transcript is a
// complete wire-level audit log. The message schema is line-oriented JSON,
// allowing a socket transport to replace this class without touching actor
// logic.
class Network {
 public:
  explicit Network(std::string center_id) : center_id_(std::move(center_id)) {}

  void register_actor(Actor* actor);

  const std::string& center_id() const { return center_id_; }
  Transcript& transcript() { return transcript_; }
  const Transcript& transcript() const { return transcript_; }

  // Node ids in ring order (lexicographic).
  std::vector<std::string> ring() const;

  // Injects a message from the analytical center and pumps deliveries until
  // the network is quiescent. Actor replies are forwarded in FIFO order.
  // Returns every message that arrived at the center during the exchange.
  // A message addressed to the center itself is recorded without delivery
  // (the center emits POOLED_ROW records this way).
  std::vector<ProtocolMessage> send_from_center(MessageKind kind,
                                                const std::string& to,
                                                nlohmann::json payload);

 private:
  std::string center_id_;
  std::map<std::string, Actor*> actors_;
  Transcript transcript_;
  std::uint64_t next_seq_ = 0;
};

}  // namespace poolclr

#endif  // POOLCLR_NETWORK_HPP_
