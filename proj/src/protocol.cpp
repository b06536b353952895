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

#include "qkit/protocol.hpp"

#include "qkit/errors.hpp"

namespace qkit::protocol {

std::string to_string(Flag flag) {
  switch (flag) {
    case Flag::kAcc:
      return "acc";
    case Flag::kRej:
      return "rej";
    case Flag::kCont:
      return "cont";
  }
  return "rej";
}

Flag flag_from_string(const std::string& name) {
  if (name == "acc") return Flag::kAcc;
  if (name == "rej") return Flag::kRej;
  if (name == "cont") return Flag::kCont;
  throw ValidationError("unknown flag '" + name + "'");
}

std::string to_string(ProtocolId id) {
  switch (id) {
    case ProtocolId::kKcvy:
      return "kcvy";
    case ProtocolId::kSimplified:
      return "simplified";
    case ProtocolId::kKlvyChsh:
      return "klvy_chsh";
  }
  return "simplified";
}

ProtocolId protocol_from_string(const std::string& name) {
  if (name == "kcvy") return ProtocolId::kKcvy;
  if (name == "simplified") return ProtocolId::kSimplified;
  if (name == "klvy_chsh" || name == "klvy-chsh") return ProtocolId::kKlvyChsh;
  throw ValidationError("unknown protocol '" + name + "'");
}

Json Transcript::messages_json() const {
  Json out = Json::array();
  for (const auto& e : messages) {
    Json item;
    item["from"] = e.direction == Direction::kToProver ? "verifier" : "prover";
    item["body"] = e.body;
    out.push_back(std::move(item));
  }
  return out;
}

bool decide(int c_hat, int b) {
  if (c_hat != 1 && c_hat != -1) throw ValidationError("c_hat must be +1 or -1");
  if (b != 0 && b != 1) throw ValidationError("b must be a bit");
  return (b == 0 ? 1 : -1) == c_hat;
}

Message challenge_message(int m) {
  Message msg;
  msg["type"] = "challenge";
  msg["m"] = m;
  return msg;
}

Message verdict_message(Flag flag) {
  Message msg;
  msg["type"] = "verdict";
  msg["flag"] = to_string(flag);
  return msg;
}

int parse_response(const Message& msg) {
  if (!msg.is_object() || msg.value("type", "") != "response") {
    throw ProtocolViolation("prover", "expected a response message");
  }
  try {
    return require_bit(msg, "b");
  } catch (const ValidationError& e) {
    throw ProtocolViolation("prover", e.what());
  }
}

namespace {

Message expect_reply(Transcript& transcript, Prover& prover, const Message& msg, Rng& rng) {
  transcript.messages.push_back({Direction::kToProver, msg});
  std::optional<Message> reply = prover.respond(msg, rng);
  if (!reply) throw ProtocolViolation("prover", "no reply to '" + msg.value("type", "?") + "'");
  transcript.messages.push_back({Direction::kToVerifier, *reply});
  return *reply;
}

void finish(ExecutionResult& result, Prover& prover, Rng& prover_rng) {
  const Message verdict = verdict_message(result.accepted() ? Flag::kAcc : Flag::kRej);
  result.transcript.messages.push_back({Direction::kToProver, verdict});
  prover.respond(verdict, prover_rng);
}

void run_into(ExecutionResult& result, Verifier& verifier, Prover& prover, Rng& verifier_rng,
              Rng& prover_rng) {
  if (verifier.protocol() != prover.protocol()) {
    throw ValidationError("verifier runs " + to_string(verifier.protocol()) + " but prover runs " +
                          to_string(prover.protocol()));
  }
  result.transcript.protocol = verifier.protocol();
  Step step = verifier.open(verifier_rng);
  while (std::holds_alternative<Message>(step)) {
    const Message reply =
        expect_reply(result.transcript, prover, std::get<Message>(step), prover_rng);
    step = verifier.on_message(reply, verifier_rng);
  }
  result.flag = std::get<Flag>(step);
  result.transcript.verifier_rand = verifier.private_record();
  result.annotations = verifier.annotations();
  if (result.flag == Flag::kCont) {
    PhaseBRecord rec;
    rec.m = verifier_rng.bit();
    rec.c_hat0 = verifier.c_hat(0);
    rec.c_hat1 = verifier.c_hat(1);
    const Message reply =
        expect_reply(result.transcript, prover, challenge_message(rec.m), prover_rng);
    rec.b = parse_response(reply);
    rec.accepted = decide(rec.c_hat(), rec.b);
    result.phase_b = rec;
  }
  finish(result, prover, prover_rng);
}

}  // namespace

ExecutionResult run_protocol(Verifier& verifier, Prover& prover, Rng& verifier_rng,
                             Rng& prover_rng) {
  ExecutionResult result;
  run_into(result, verifier, prover, verifier_rng, prover_rng);
  return result;
}

ExecutionResult run_protocol_recorded(Verifier& verifier, Prover& prover, Rng& verifier_rng,
                                      Rng& prover_rng) {
  ExecutionResult result;
  try {
    run_into(result, verifier, prover, verifier_rng, prover_rng);
  } catch (const ProtocolViolation& e) {
    result.flag = Flag::kRej;
    result.phase_b.reset();
    result.violation = e.what();
    result.transcript.verifier_rand = verifier.private_record();
    result.annotations = verifier.annotations();
  }
  return result;
}

}  // namespace qkit::protocol
