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

#include "qkit/mock_qhe.hpp"

#include <fmt/format.h>

#include "qkit/errors.hpp"

namespace qkit::protocol::qhe {
namespace {

bool is_tag(const std::string& s) {
  if (s.size() != 32) return false;
  for (char c : s) {
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
  }
  return true;
}

}  // namespace

std::string random_tag(Rng& rng) {
  const std::uint64_t hi = rng();
  const std::uint64_t lo = rng();
  return fmt::format("{:016x}{:016x}", hi, lo);
}

Json MockCiphertext::to_wire() const {
  Json j;
  j["type"] = "ciphertext";
  j["payload"] = payload_;
  j["nonce"] = nonce_;
  return j;
}

MockCiphertext MockCiphertext::from_wire(const Json& j) {
  if (!j.is_object() || j.value("type", "") != "ciphertext") {
    throw ValidationError("expected a ciphertext object");
  }
  MockCiphertext ct;
  ct.payload_ = require_bit(j, "payload");
  ct.nonce_ = require_string(j, "nonce");
  if (!is_tag(ct.nonce_)) throw ValidationError("ciphertext nonce must be 32 lowercase hex digits");
  return ct;
}

SecretKey SecretKey::generate(Rng& rng) {
  SecretKey sk;
  sk.id_ = random_tag(rng);
  return sk;
}

MockCiphertext SecretKey::enc(int bit, Rng& rng) {
  if (bit != 0 && bit != 1) throw ValidationError("plaintext must be a bit");
  MockCiphertext ct;
  ct.payload_ = bit;
  do {
    ct.nonce_ = random_tag(rng);
  } while (issued_.count(ct.nonce_) != 0);
  issued_.insert(ct.nonce_);
  return ct;
}

int SecretKey::dec(const MockCiphertext& ct) const {
  if (issued_.count(ct.nonce_) == 0) throw IntegrityError("ciphertext nonce was not issued by this key");
  return ct.payload_;
}

Json SecretKey::to_json() const {
  Json j;
  j["id"] = id_;
  j["nonces"] = Json::array();
  for (const auto& n : issued_) j["nonces"].push_back(n);
  return j;
}

SecretKey SecretKey::from_json(const Json& j) {
  SecretKey sk;
  sk.id_ = require_string(j, "id");
  const Json& nonces = require(j, "nonces");
  if (!nonces.is_array()) throw ValidationError("nonces must be an array");
  for (const auto& n : nonces) {
    if (!n.is_string() || !is_tag(n.get<std::string>())) throw ValidationError("bad nonce");
    sk.issued_.insert(n.get<std::string>());
  }
  return sk;
}

MockCiphertext eval(const MockCiphertext& ct, const std::function<int(int)>& fn) {
  const int out = fn(ct.payload_);
  if (out != 0 && out != 1) throw ValidationError("homomorphic function must return a bit");
  MockCiphertext res = ct;
  res.payload_ = out;
  return res;
}

}  // namespace qkit::protocol::qhe
