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

#ifndef QKIT_TCF_HPP
#define QKIT_TCF_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "qkit/bits.hpp"
#include "qkit/json.hpp"
#include "qkit/rng.hpp"

/// Trapdoor claw-free function families.
///
/// Two families are provided:
///  - rabin: f(x) = x^2 mod N for a Blum integer N = p*q, on the domain of
///    integers in [1, (N-1)/2] coprime to N. Exactly 2-to-1.
///  - toy: an explicit table over {0,1}^n pairing x with x XOR s for a
///    secret shift s whose top bit is set. Small enough to enumerate.
///
/// Parameters are desk-scale. Claw-freeness is modeled, not achieved.
namespace qkit::tcf {

using BigInt = boost::multiprecision::cpp_int;

enum class Family { kRabin, kToy };

std::string to_string(Family family);
Family family_from_string(const std::string& name);

/// Largest Rabin modulus accepted, in bits.
inline constexpr std::size_t kMaxModulusBits = 1024;
/// Largest toy domain, in bits (table has 2^n entries).
inline constexpr std::size_t kMaxToyBits = 20;

/// Public key. Domain and range elements are bit strings of
/// domain_bits / range_bits.
struct TcfKey {
  Family family = Family::kToy;
  std::size_t domain_bits = 0;
  std::size_t range_bits = 0;
  BigInt modulus;                    // rabin
  std::vector<std::uint32_t> table;  // toy: table[x] = f(x)

  friend bool operator==(const TcfKey&, const TcfKey&) = default;
};

struct TcfTrapdoor {
  BigInt p;  // rabin
  BigInt q;
  std::uint32_t shift = 0;             // toy
  std::vector<std::uint32_t> inverse;  // toy: inverse[y] = type-0 preimage

  friend bool operator==(const TcfTrapdoor&, const TcfTrapdoor&) = default;
};

struct Claw {
  BitString x0;
  BitString x1;
  BitString y;

  friend bool operator==(const Claw&, const Claw&) = default;
};

struct KeyPair {
  TcfKey key;
  TcfTrapdoor trapdoor;
};

/// Rabin: p is a lambda-bit Blum prime and q a (lambda+1)-bit one.
/// Toy: lambda is the domain width n.
KeyPair gen(std::size_t lambda, Family family, Rng& rng);

BitString eval(const TcfKey& key, const BitString& x);
Claw invert(const TcfTrapdoor& trapdoor, const TcfKey& key, const BitString& y);

/// Publicly computable bit separating the two members of every claw.
/// Rabin: 0 iff the Jacobi symbol (x/N) is -1. Toy: top bit of x.
int preimage_type(const TcfKey& key, const BitString& x);

/// Domain membership without throwing.
bool in_domain(const TcfKey& key, const BitString& x);

/// Both members of the claw are valid, distinct and collide.
bool is_valid_claw(const TcfKey& key, const BitString& a, const BitString& b);

/// Uniform domain element, optionally restricted to one preimage type.
BitString sample_domain(const TcfKey& key, Rng& rng);
BitString sample_domain_of_type(const TcfKey& key, int type, Rng& rng);

Json key_to_json(const TcfKey& key);
TcfKey key_from_json(const Json& j);
Json trapdoor_to_json(const TcfKey& key, const TcfTrapdoor& trapdoor);
TcfTrapdoor trapdoor_from_json(const TcfKey& key, const Json& j);

// Number-theory helpers, exposed for tests and for the prover-side simulator.
BigInt to_bigint(const BitString& bits);
BitString from_bigint(const BigInt& value, std::size_t n_bits);
/// Jacobi symbol (a/n) for odd positive n.
int jacobi(BigInt a, BigInt n);
bool is_blum_prime(const BigInt& p, Rng& rng);

}  // namespace qkit::tcf

#endif  // QKIT_TCF_HPP
