// Copyright 2026 The qkit Authors
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

#ifndef QKIT_PROTOCOL_HPP
#define QKIT_PROTOCOL_HPP

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qkit/json.hpp"
#include "qkit/rng.hpp"

/// Two-phase protocol template: a Phase A interaction ending in a flag, then
/// (on cont) a one-bit challenge m, a one-bit answer b, and the accept rule
/// (-1)^b = c_hat_m.
namespace qkit::protocol {

enum class Flag { kAcc, kRej, kCont };
enum class ProtocolId { kKcvy, kSimplified, kKlvyChsh };

std::string to_string(Flag flag);
Flag flag_from_string(const std::string& name);
std::string to_string(ProtocolId id);
ProtocolId protocol_from_string(const std::string& name);

using Message = Json;
/// A verifier step either sends a message or ends Phase A with a flag.
using Step = std::variant<Message, Flag>;

class Verifier {
 public:
  virtual ~Verifier() = default;
  virtual ProtocolId protocol() const = 0;
  /// First Phase A message.
  virtual Step open(Rng& rng) = 0;
  /// Reaction to a prover message. Out-of-order or malformed input throws
  /// ProtocolViolation attributed to the prover.
  virtual Step on_message(const Message& msg, Rng& rng) = 0;
  /// +1 or -1; only valid once Phase A ended with cont.
  virtual int c_hat(int m) const = 0;
  /// The verifier's private coins and secrets. Never sent to the prover.
  virtual Json private_record() const = 0;
  /// Public per-run annotations (e.g. the KCVY branch); may be empty.
  virtual Json annotations() const { return Json::object(); }
};

class Prover {
 public:
  virtual ~Prover() = default;
  virtual ProtocolId protocol() const = 0;
  /// Answer to a verifier message; nullopt when no answer is due (verdicts).
  virtual std::optional<Message> respond(const Message& msg, Rng& rng) = 0;
};

enum class Direction { kToProver, kToVerifier };

struct TranscriptEntry {
  Direction direction;
  Message body;
};

struct Transcript {
  ProtocolId protocol = ProtocolId::kSimplified;
  std::vector<TranscriptEntry> messages;
  Json verifier_rand;

  /// [{"from": "verifier"|"prover", "body": {...}}, ...]
  Json messages_json() const;
};

struct PhaseBRecord {
  int m = 0;
  int b = 0;
  int c_hat0 = 1;
  int c_hat1 = 1;
  bool accepted = false;

  int c_hat() const { return m == 0 ? c_hat0 : c_hat1; }
};

/// flag is the Phase A outcome; a cont run is decided by phase_b.
struct ExecutionResult {
  Flag flag = Flag::kRej;
  Transcript transcript;
  std::optional<PhaseBRecord> phase_b;
  Json annotations = Json::object();
  /// Set when the run ended because a party broke the message contract.
  std::optional<std::string> violation;

  bool accepted() const {
    return flag == Flag::kAcc || (flag == Flag::kCont && phase_b && phase_b->accepted);
  }
};

/// True iff (-1)^b = c_hat. Throws ValidationError unless c_hat is +-1 and b a bit.
bool decide(int c_hat, int b);

Message challenge_message(int m);
Message verdict_message(Flag flag);
/// Parses {"type":"response","b":0|1}; throws ProtocolViolation("prover") otherwise.
int parse_response(const Message& msg);

/// Runs one execution. Protocol violations propagate as exceptions.
ExecutionResult run_protocol(Verifier& verifier, Prover& prover, Rng& verifier_rng,
                             Rng& prover_rng);

/// As run_protocol, but a ProtocolViolation ends the run with flag rej, the
/// partial transcript and the violation text.
ExecutionResult run_protocol_recorded(Verifier& verifier, Prover& prover, Rng& verifier_rng,
                                      Rng& prover_rng);

}  // namespace qkit::protocol

#endif  // QKIT_PROTOCOL_HPP
