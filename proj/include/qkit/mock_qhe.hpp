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

#ifndef QKIT_MOCK_QHE_HPP
#define QKIT_MOCK_QHE_HPP

#include <functional>
#include <set>
#include <string>

#include "qkit/json.hpp"
#include "qkit/rng.hpp"

/// Transparent stand-in for homomorphic encryption of single bits.
///
/// The payload travels in the clear on the wire, so it offers no secrecy.
/// Prover code can only transform a ciphertext through eval(); reading the
/// payload is reserved to the key holder.
namespace qkit::protocol::qhe {

class SecretKey;

class MockCiphertext {
 public:
  const std::string& nonce() const { return nonce_; }

  /// {"type":"ciphertext","payload":0|1,"nonce":"<32 hex>"}
  Json to_wire() const;
  /// Throws ValidationError on a malformed object.
  static MockCiphertext from_wire(const Json& j);

  friend bool operator==(const MockCiphertext&, const MockCiphertext&) = default;

 private:
  friend class SecretKey;
  friend MockCiphertext eval(const MockCiphertext& ct, const std::function<int(int)>& fn);

  int payload_ = 0;
  std::string nonce_;
};

class SecretKey {
 public:
  static SecretKey generate(Rng& rng);

  /// Fresh 128-bit nonce per call.
  MockCiphertext enc(int bit, Rng& rng);
  /// Throws IntegrityError if the nonce was not issued under this key.
  int dec(const MockCiphertext& ct) const;

  Json to_json() const;
  static SecretKey from_json(const Json& j);

 private:
  std::string id_;
  std::set<std::string> issued_;
};

/// Homomorphic evaluation of a bit function; the nonce is carried over.
MockCiphertext eval(const MockCiphertext& ct, const std::function<int(int)>& fn);

/// 128 random bits as 32 lowercase hex digits.
std::string random_tag(Rng& rng);

}  // namespace qkit::protocol::qhe

#endif  // QKIT_MOCK_QHE_HPP
