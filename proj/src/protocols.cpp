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

#include "qkit/protocols.hpp"

#include "qkit/errors.hpp"

namespace qkit::protocol {
namespace {

const std::string kProver = "prover";
const std::string kVerifier = "verifier";

int sign(int bit) { return bit == 0 ? 1 : -1; }

void check_claw(const BitString& x0, const BitString& x1) {
  if (x0.size() != x1.size()) throw ValidationError("invalid claw: width mismatch");
  if (x0 == x1) throw ValidationError("invalid claw: x0 equals x1");
}

// Inverts a prover-chosen y. Returns nullopt when y has no preimages.
std::optional<tcf::Claw> try_invert(const tcf::KeyPair& keys, const BitString& y) {
  try {
    return tcf::invert(keys.trapdoor, keys.key, y);
  } catch (const NoPreimageError&) {
    return std::nullopt;
  }
}

const Json* find_message(const Json& messages, const std::string& from, const std::string& type) {
  for (const auto& item : messages) {
    if (item.value("from", "") == from && item.contains("body") &&
        message_type(item["body"]) == type) {
      return &item["body"];
    }
  }
  return nullptr;
}

const Json& need_message(const Json& messages, const std::string& from, const std::string& type) {
  const Json* found = find_message(messages, from, type);
  if (found == nullptr) throw ValidationError("transcript has no '" + type + "' message");
  return *found;
}

tcf::Claw claw_from_record(const Json& verifier_rand, const Json& messages) {
  const tcf::TcfKey key = parse_key_message(need_message(messages, kVerifier, "key"));
  const tcf::TcfTrapdoor td = tcf::trapdoor_from_json(key, require(verifier_rand, "trapdoor"));
  const BitString y = parse_bits(need_message(messages, kProver, "y"), "value", key.range_bits,
                                 kProver);
  return tcf::invert(td, key, y);
}

}  // namespace

int kcvy_c_hat(const BitString& r, const BitString& x0, const BitString& x1, const BitString& d,
               int m) {
  check_claw(x0, x1);
  const BitString s = x0 ^ x1;
  if (r.dot(s) == 0) return sign(r.dot(x0));
  return sign(d.dot(s) ^ m);
}

int simplified_c_hat(const BitString& r0, const BitString& r1, const BitString& x0,
                     const BitString& x1, const BitString& d, int m) {
  check_claw(x0, x1);
  const int alpha = r0.dot(x0) ^ r1.dot(x1);
  if (alpha == 0) return sign(r0.dot(x0));
  return sign(d.dot(x0 ^ x1) ^ m);
}

int klvy_c_hat(int x, int a, int m) {
  if ((x | a | m) & ~1) throw ValidationError("klvy_c_hat expects bits");
  return sign(a ^ (x & m));
}

// ---------------------------------------------------------------------------
// Messages

std::string message_type(const Message& msg) {
  if (!msg.is_object()) return "";
  const auto it = msg.find("type");
  if (it == msg.end() || !it->is_string()) return "";
  return it->get<std::string>();
}

void expect_type(const Message& msg, const std::string& type, const std::string& sender) {
  const std::string got = message_type(msg);
  if (got != type) {
    throw ProtocolViolation(sender, "expected '" + type + "' message, got '" + got + "'");
  }
}

BitString parse_bits(const Message& msg, const std::string& field, std::size_t width,
                     const std::string& sender) {
  try {
    BitString bits = bits_from_json(require(msg, field));
    if (bits.size() != width) {
      throw ValidationError("field '" + field + "' must have " + std::to_string(width) + " bits");
    }
    return bits;
  } catch (const ValidationError& e) {
    throw ProtocolViolation(sender, e.what());
  }
}

Message key_message(const tcf::TcfKey& key) {
  Message msg;
  msg["type"] = "key";
  const Json body = tcf::key_to_json(key);
  for (const auto& [k, v] : body.items()) msg[k] = v;
  return msg;
}

tcf::TcfKey parse_key_message(const Message& msg) {
  expect_type(msg, "key", kVerifier);
  try {
    return tcf::key_from_json(msg);
  } catch (const ValidationError& e) {
    throw ProtocolViolation(kVerifier, e.what());
  }
}

Message y_message(const BitString& y) {
  Message msg;
  msg["type"] = "y";
  msg["value"] = bits_to_json(y);
  return msg;
}

Message r_message(const BitString& r0, const BitString& r1) {
  Message msg;
  msg["type"] = "r";
  msg["r0"] = bits_to_json(r0);
  msg["r1"] = bits_to_json(r1);
  return msg;
}

Message d_message(const BitString& d) {
  Message msg;
  msg["type"] = "d";
  msg["d"] = bits_to_json(d);
  return msg;
}

Message branch_message(KcvyBranch branch, const BitString* r) {
  Message msg;
  msg["type"] = "branch";
  msg["value"] = branch == KcvyBranch::kPreimage ? "preimage" : "equation";
  if (r != nullptr) msg["r"] = bits_to_json(*r);
  return msg;
}

Message preimage_message(const BitString& x) {
  Message msg;
  msg["type"] = "preimage";
  msg["x"] = bits_to_json(x);
  return msg;
}

Message response_message(int b) {
  Message msg;
  msg["type"] = "response";
  msg["b"] = b;
  return msg;
}

// ---------------------------------------------------------------------------
// Simplified KCVY

Step SimplifiedVerifier::open(Rng& rng) {
  if (stage_ != Stage::kInit) throw ValidationError("verifier already opened");
  sentinel_ = qhe::random_tag(rng);
  keys_ = tcf::gen(config_.n_bits, config_.family, rng);
  stage_ = Stage::kAwaitY;
  return key_message(keys_.key);
}

Step SimplifiedVerifier::on_message(const Message& msg, Rng& rng) {
  switch (stage_) {
    case Stage::kAwaitY: {
      expect_type(msg, "y", kProver);
      const BitString y = parse_bits(msg, "value", keys_.key.range_bits, kProver);
      claw_ = try_invert(keys_, y);
      if (!claw_) {
        reject_reason_ = "y outside image";
        stage_ = Stage::kDone;
        return Flag::kRej;
      }
      const std::size_t n = keys_.key.domain_bits;
      r0_ = random_bitstring(n, rng);
      r1_ = random_bitstring(n, rng);
      stage_ = Stage::kAwaitD;
      return r_message(r0_, r1_);
    }
    case Stage::kAwaitD:
      expect_type(msg, "d", kProver);
      d_ = parse_bits(msg, "d", keys_.key.domain_bits, kProver);
      stage_ = Stage::kDone;
      return Flag::kCont;
    default:
      throw ProtocolViolation(kProver, "unexpected message '" + message_type(msg) + "'");
  }
}

int SimplifiedVerifier::c_hat(int m) const {
  if (stage_ != Stage::kDone || !claw_ || d_.size() == 0) {
    throw ValidationError("c_hat requested before Phase A ended with cont");
  }
  return simplified_c_hat(r0_, r1_, claw_->x0, claw_->x1, d_, m);
}

Json SimplifiedVerifier::private_record() const {
  Json j;
  j["sentinel"] = sentinel_;
  if (stage_ == Stage::kInit) return j;
  j["trapdoor"] = tcf::trapdoor_to_json(keys_.key, keys_.trapdoor);
  if (r0_.size() != 0) {
    j["r0"] = bits_to_json(r0_);
    j["r1"] = bits_to_json(r1_);
  }
  return j;
}

Json SimplifiedVerifier::annotations() const {
  Json j = Json::object();
  if (!reject_reason_.empty()) j["reject_reason"] = reject_reason_;
  return j;
}

// ---------------------------------------------------------------------------
// KCVY

Step KcvyVerifier::open(Rng& rng) {
  if (stage_ != Stage::kInit) throw ValidationError("verifier already opened");
  sentinel_ = qhe::random_tag(rng);
  keys_ = tcf::gen(config_.n_bits, config_.family, rng);
  stage_ = Stage::kAwaitY;
  return key_message(keys_.key);
}

Step KcvyVerifier::on_message(const Message& msg, Rng& rng) {
  switch (stage_) {
    case Stage::kAwaitY: {
      expect_type(msg, "y", kProver);
      const BitString y = parse_bits(msg, "value", keys_.key.range_bits, kProver);
      claw_ = try_invert(keys_, y);
      if (!claw_) {
        reject_reason_ = "y outside image";
        stage_ = Stage::kDone;
        return Flag::kRej;
      }
      if (rng.bit() == 0) {
        branch_ = KcvyBranch::kPreimage;
        stage_ = Stage::kAwaitPreimage;
        return branch_message(*branch_, nullptr);
      }
      branch_ = KcvyBranch::kEquation;
      r_ = random_bitstring(keys_.key.domain_bits, rng);
      stage_ = Stage::kAwaitD;
      return branch_message(*branch_, &r_);
    }
    case Stage::kAwaitPreimage: {
      expect_type(msg, "preimage", kProver);
      const BitString x = parse_bits(msg, "x", keys_.key.domain_bits, kProver);
      stage_ = Stage::kDone;
      return (x == claw_->x0 || x == claw_->x1) ? Flag::kAcc : Flag::kRej;
    }
    case Stage::kAwaitD:
      expect_type(msg, "d", kProver);
      d_ = parse_bits(msg, "d", keys_.key.domain_bits, kProver);
      stage_ = Stage::kDone;
      return Flag::kCont;
    default:
      throw ProtocolViolation(kProver, "unexpected message '" + message_type(msg) + "'");
  }
}

int KcvyVerifier::c_hat(int m) const {
  if (stage_ != Stage::kDone || branch_ != KcvyBranch::kEquation || d_.size() == 0) {
    throw ValidationError("c_hat requested before Phase A ended with cont");
  }
  return kcvy_c_hat(r_, claw_->x0, claw_->x1, d_, m);
}

Json KcvyVerifier::private_record() const {
  Json j;
  j["sentinel"] = sentinel_;
  if (stage_ == Stage::kInit) return j;
  j["trapdoor"] = tcf::trapdoor_to_json(keys_.key, keys_.trapdoor);
  if (branch_) j["branch"] = *branch_ == KcvyBranch::kPreimage ? "preimage" : "equation";
  if (r_.size() != 0) j["r"] = bits_to_json(r_);
  return j;
}

Json KcvyVerifier::annotations() const {
  Json j = Json::object();
  if (branch_) j["branch"] = *branch_ == KcvyBranch::kPreimage ? "preimage" : "equation";
  if (!reject_reason_.empty()) j["reject_reason"] = reject_reason_;
  return j;
}

// ---------------------------------------------------------------------------
// KLVY compiled CHSH

Step KlvyChshVerifier::open(Rng& rng) {
  if (stage_ != Stage::kInit) throw ValidationError("verifier already opened");
  sentinel_ = qhe::random_tag(rng);
  sk_ = qhe::SecretKey::generate(rng);
  x_ = rng.bit();
  stage_ = Stage::kAwaitAnswer;
  return sk_->enc(x_, rng).to_wire();
}

Step KlvyChshVerifier::on_message(const Message& msg, Rng& rng) {
  (void)rng;
  if (stage_ != Stage::kAwaitAnswer) {
    throw ProtocolViolation(kProver, "unexpected message '" + message_type(msg) + "'");
  }
  expect_type(msg, "ciphertext", kProver);
  qhe::MockCiphertext ct;
  try {
    ct = qhe::MockCiphertext::from_wire(msg);
  } catch (const ValidationError& e) {
    throw ProtocolViolation(kProver, e.what());
  }
  stage_ = Stage::kDone;
  try {
    a_ = sk_->dec(ct);
  } catch (const IntegrityError&) {
    reject_reason_ = "undecryptable answer";
    return Flag::kRej;
  }
  return Flag::kCont;
}

int KlvyChshVerifier::c_hat(int m) const {
  if (stage_ != Stage::kDone || !reject_reason_.empty()) {
    throw ValidationError("c_hat requested before Phase A ended with cont");
  }
  return klvy_c_hat(x_, a_, m);
}

Json KlvyChshVerifier::private_record() const {
  Json j;
  j["sentinel"] = sentinel_;
  if (stage_ == Stage::kInit) return j;
  j["x"] = x_;
  j["sk"] = sk_->to_json();
  return j;
}

Json KlvyChshVerifier::annotations() const {
  Json j = Json::object();
  if (!reject_reason_.empty()) j["reject_reason"] = reject_reason_;
  return j;
}

std::unique_ptr<Verifier> make_verifier(ProtocolId id, const VerifierConfig& config) {
  switch (id) {
    case ProtocolId::kKcvy:
      return std::make_unique<KcvyVerifier>(config);
    case ProtocolId::kSimplified:
      return std::make_unique<SimplifiedVerifier>(config);
    case ProtocolId::kKlvyChsh:
      return std::make_unique<KlvyChshVerifier>();
  }
  throw ValidationError("unknown protocol");
}

std::pair<int, int> recompute_c_hats(ProtocolId id, const Json& verifier_rand,
                                     const Json& messages) {
  if (!messages.is_array()) throw ValidationError("messages must be an array");
  switch (id) {
    case ProtocolId::kSimplified: {
      const tcf::Claw claw = claw_from_record(verifier_rand, messages);
      const std::size_t n = claw.x0.size();
      const BitString r0 = bits_from_json(require(verifier_rand, "r0"));
      const BitString r1 = bits_from_json(require(verifier_rand, "r1"));
      const BitString d = parse_bits(need_message(messages, kProver, "d"), "d", n, kProver);
      return {simplified_c_hat(r0, r1, claw.x0, claw.x1, d, 0),
              simplified_c_hat(r0, r1, claw.x0, claw.x1, d, 1)};
    }
    case ProtocolId::kKcvy: {
      const tcf::Claw claw = claw_from_record(verifier_rand, messages);
      const std::size_t n = claw.x0.size();
      const BitString r = bits_from_json(require(verifier_rand, "r"));
      const BitString d = parse_bits(need_message(messages, kProver, "d"), "d", n, kProver);
      return {kcvy_c_hat(r, claw.x0, claw.x1, d, 0), kcvy_c_hat(r, claw.x0, claw.x1, d, 1)};
    }
    case ProtocolId::kKlvyChsh: {
      const qhe::SecretKey sk = qhe::SecretKey::from_json(require(verifier_rand, "sk"));
      const int x = require_bit(verifier_rand, "x");
      const int a =
          sk.dec(qhe::MockCiphertext::from_wire(need_message(messages, kProver, "ciphertext")));
      return {klvy_c_hat(x, a, 0), klvy_c_hat(x, a, 1)};
    }
  }
  throw ValidationError("unknown protocol");
}

}  // namespace qkit::protocol
