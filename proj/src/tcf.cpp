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

#include "qkit/tcf.hpp"

#include <algorithm>
#include <numeric>
#include <utility>

#include <boost/multiprecision/miller_rabin.hpp>

#include "qkit/errors.hpp"

namespace qkit::tcf {
namespace {

std::size_t bit_length(const BigInt& v) {
  if (v <= 0) return 0;
  return boost::multiprecision::msb(v) + 1;
}

BigInt random_bits(std::size_t n_bits, Rng& rng) {
  BigInt out = 0;
  std::size_t filled = 0;
  while (filled < n_bits) {
    out <<= 64;
    out |= BigInt(rng());
    filled += 64;
  }
  out >>= (filled - n_bits);
  return out;
}

// Random lambda-bit prime p with p = 3 mod 4.
BigInt random_blum_prime(std::size_t lambda, Rng& rng) {
  const BigInt low = BigInt(1) << (lambda - 1);
  const BigInt high = BigInt(1) << lambda;  // exclusive
  const std::size_t attempts = 200 * lambda + 1000;
  for (std::size_t k = 0; k < attempts; ++k) {
    BigInt c = random_bits(lambda, rng) | low | 3;
    if (c < high && is_blum_prime(c, rng)) return c;
  }
  // Small widths: a systematic sweep settles whether any candidate exists.
  if (lambda <= 32) {
    for (BigInt c = low | 3; c < high; c += 4) {
      if (is_blum_prime(c, rng)) return c;
    }
  }
  throw GenerationError("no " + std::to_string(lambda) + "-bit Blum prime found");
}

BigInt half_bound(const TcfKey& key) { return (key.modulus - 1) / 2; }

BigInt sqrt_mod_blum(const BigInt& y, const BigInt& p) {
  return boost::multiprecision::powm(y % p, (p + 1) / 4, p);
}

void check_width(const TcfKey& key, const BitString& x, std::size_t expected,
                 const char* what) {
  (void)key;
  if (x.size() != expected) {
    throw DomainError(std::string(what) + " has " + std::to_string(x.size()) +
                      " bits, expected " + std::to_string(expected));
  }
}

KeyPair gen_rabin(std::size_t lambda, Rng& rng) {
  if (2 * lambda + 1 > kMaxModulusBits) {
    throw ValidationError("Rabin modulus would exceed " + std::to_string(kMaxModulusBits) +
                          " bits");
  }
  KeyPair kp;
  kp.trapdoor.p = random_blum_prime(lambda, rng);
  kp.trapdoor.q = random_blum_prime(lambda + 1, rng);
  kp.key.family = Family::kRabin;
  kp.key.modulus = kp.trapdoor.p * kp.trapdoor.q;
  kp.key.domain_bits = bit_length(half_bound(kp.key));
  kp.key.range_bits = bit_length(kp.key.modulus);
  return kp;
}

KeyPair gen_toy(std::size_t n, Rng& rng) {
  if (n > kMaxToyBits) {
    throw ValidationError("toy family supports at most " + std::to_string(kMaxToyBits) +
                          " bits");
  }
  const std::uint32_t half = std::uint32_t{1} << (n - 1);
  KeyPair kp;
  kp.trapdoor.shift = half | static_cast<std::uint32_t>(rng.below(half));
  std::vector<std::uint32_t> perm(half);
  std::iota(perm.begin(), perm.end(), 0U);
  for (std::uint32_t i = half; i > 1; --i) {
    std::swap(perm[i - 1], perm[rng.below(i)]);
  }
  kp.key.family = Family::kToy;
  kp.key.domain_bits = n;
  kp.key.range_bits = n - 1;
  kp.key.table.assign(std::size_t{1} << n, 0);
  kp.trapdoor.inverse.assign(half, 0);
  for (std::uint32_t x = 0; x < half; ++x) {
    kp.key.table[x] = perm[x];
    kp.key.table[x ^ kp.trapdoor.shift] = perm[x];
    kp.trapdoor.inverse[perm[x]] = x;
  }
  return kp;
}

void validate_toy_table(const TcfKey& key) {
  const std::size_t n = key.domain_bits;
  if (n < 2 || n > kMaxToyBits) throw ValidationError("toy n_bits out of range");
  if (key.table.size() != (std::size_t{1} << n)) {
    throw ValidationError("toy table must have 2^n_bits entries");
  }
  const std::size_t half = std::size_t{1} << (n - 1);
  std::vector<std::uint32_t> low(half, 0), high(half, 0);
  for (std::size_t x = 0; x < key.table.size(); ++x) {
    const auto y = key.table[x];
    if (y >= half) throw ValidationError("toy table entry out of range");
    ((x >> (n - 1)) ? high : low)[y]++;
  }
  for (std::size_t y = 0; y < half; ++y) {
    if (low[y] != 1 || high[y] != 1) {
      throw ValidationError("toy table is not a 2-to-1 pairing across the top bit");
    }
  }
}

}  // namespace

std::string to_string(Family family) { return family == Family::kRabin ? "rabin" : "toy"; }

Family family_from_string(const std::string& name) {
  if (name == "rabin") return Family::kRabin;
  if (name == "toy") return Family::kToy;
  throw ValidationError("unknown TCF family '" + name + "'");
}

KeyPair gen(std::size_t lambda, Family family, Rng& rng) {
  if (lambda < 2) throw GenerationError("security parameter must be at least 2");
  return family == Family::kRabin ? gen_rabin(lambda, rng) : gen_toy(lambda, rng);
}

bool in_domain(const TcfKey& key, const BitString& x) {
  if (x.size() != key.domain_bits) return false;
  if (key.family == Family::kToy) return true;
  const BigInt v = to_bigint(x);
  return v >= 1 && v <= half_bound(key) && boost::multiprecision::gcd(v, key.modulus) == 1;
}

BitString eval(const TcfKey& key, const BitString& x) {
  check_width(key, x, key.domain_bits, "domain element");
  if (key.family == Family::kToy) {
    return BitString::from_uint(key.table[x.to_uint()], key.range_bits);
  }
  if (!in_domain(key, x)) throw DomainError("x is outside [1, (N-1)/2] or shares a factor with N");
  const BigInt v = to_bigint(x);
  return from_bigint((v * v) % key.modulus, key.range_bits);
}

Claw invert(const TcfTrapdoor& trapdoor, const TcfKey& key, const BitString& y) {
  if (y.size() != key.range_bits) throw NoPreimageError("range element has the wrong width");
  Claw claw;
  claw.y = y;
  if (key.family == Family::kToy) {
    const std::uint64_t v = y.to_uint();
    if (v >= trapdoor.inverse.size()) throw NoPreimageError("y is not in the image");
    const std::uint32_t x0 = trapdoor.inverse[v];
    claw.x0 = BitString::from_uint(x0, key.domain_bits);
    claw.x1 = BitString::from_uint(x0 ^ trapdoor.shift, key.domain_bits);
    return claw;
  }
  const BigInt& n = key.modulus;
  const BigInt v = to_bigint(y);
  if (v < 1 || v >= n || boost::multiprecision::gcd(v, n) != 1) {
    throw NoPreimageError("y is not a unit modulo N");
  }
  const BigInt& p = trapdoor.p;
  const BigInt& q = trapdoor.q;
  const BigInt rp = sqrt_mod_blum(v, p);
  const BigInt rq = sqrt_mod_blum(v, q);
  if ((rp * rp) % p != v % p || (rq * rq) % q != v % q) {
    throw NoPreimageError("y is not a quadratic residue modulo N");
  }
  const BigInt p_inv = boost::multiprecision::powm(p % q, q - 2, q);
  const BigInt bound = half_bound(key);
  std::vector<BigInt> roots;
  for (const BigInt& a : {rp, BigInt(p - rp) % p}) {
    for (const BigInt& b : {rq, BigInt(q - rq) % q}) {
      BigInt t = ((b - a % q) % q + q) % q;
      BigInt x = a + p * ((t * p_inv) % q);
      if (x >= 1 && x <= bound) roots.push_back(x);
    }
  }
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
  if (roots.size() != 2) throw NoPreimageError("unexpected root structure for y");
  if (jacobi(roots[0], n) != -1) std::swap(roots[0], roots[1]);
  claw.x0 = from_bigint(roots[0], key.domain_bits);
  claw.x1 = from_bigint(roots[1], key.domain_bits);
  return claw;
}

int preimage_type(const TcfKey& key, const BitString& x) {
  if (!in_domain(key, x)) throw DomainError("x is outside the domain");
  if (key.family == Family::kToy) return x.get(key.domain_bits - 1) ? 1 : 0;
  return jacobi(to_bigint(x), key.modulus) == -1 ? 0 : 1;
}

bool is_valid_claw(const TcfKey& key, const BitString& a, const BitString& b) {
  if (!in_domain(key, a) || !in_domain(key, b) || a == b) return false;
  return eval(key, a) == eval(key, b);
}

BitString sample_domain(const TcfKey& key, Rng& rng) {
  if (key.family == Family::kToy) {
    return BitString::from_uint(rng.below(std::uint64_t{1} << key.domain_bits), key.domain_bits);
  }
  const BigInt bound = half_bound(key);
  for (;;) {
    BigInt v = random_bits(key.domain_bits, rng);
    if (v >= 1 && v <= bound && boost::multiprecision::gcd(v, key.modulus) == 1) {
      return from_bigint(v, key.domain_bits);
    }
  }
}

BitString sample_domain_of_type(const TcfKey& key, int type, Rng& rng) {
  if (type != 0 && type != 1) throw ValidationError("preimage type must be 0 or 1");
  for (;;) {
    BitString x = sample_domain(key, rng);
    if (preimage_type(key, x) == type) return x;
  }
}

Json key_to_json(const TcfKey& key) {
  Json j;
  j["family"] = to_string(key.family);
  j["n_bits"] = key.domain_bits;
  if (key.family == Family::kRabin) {
    j["modulus"] = key.modulus.str();
  } else {
    j["table"] = key.table;
  }
  return j;
}

TcfKey key_from_json(const Json& j) {
  TcfKey key;
  key.family = family_from_string(require_string(j, "family"));
  const Json& n = require(j, "n_bits");
  if (!n.is_number_unsigned()) throw ValidationError("n_bits must be a non-negative integer");
  key.domain_bits = n.get<std::size_t>();
  if (key.family == Family::kRabin) {
    const std::string text = require_string(j, "modulus");
    if (text.empty() || text.size() > 400 ||
        !std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      throw ValidationError("modulus must be a decimal string");
    }
    key.modulus = BigInt(text);
    if (key.modulus < 21 || key.modulus % 4 != 1 || bit_length(key.modulus) > kMaxModulusBits) {
      throw ValidationError("modulus is not a plausible Blum integer");
    }
    if (bit_length(half_bound(key)) != key.domain_bits) {
      throw ValidationError("n_bits does not match the modulus");
    }
    key.range_bits = bit_length(key.modulus);
  } else {
    const Json& table = require(j, "table");
    if (!table.is_array()) throw ValidationError("toy table must be an array");
    for (const auto& e : table) {
      if (!e.is_number_unsigned()) throw ValidationError("toy table entries must be integers");
      key.table.push_back(e.get<std::uint32_t>());
    }
    validate_toy_table(key);
    key.range_bits = key.domain_bits - 1;
  }
  return key;
}

Json trapdoor_to_json(const TcfKey& key, const TcfTrapdoor& trapdoor) {
  Json j;
  if (key.family == Family::kRabin) {
    j["p"] = trapdoor.p.str();
    j["q"] = trapdoor.q.str();
  } else {
    j["shift"] = trapdoor.shift;
    j["inverse"] = trapdoor.inverse;
  }
  return j;
}

TcfTrapdoor trapdoor_from_json(const TcfKey& key, const Json& j) {
  TcfTrapdoor td;
  if (key.family == Family::kRabin) {
    td.p = BigInt(require_string(j, "p"));
    td.q = BigInt(require_string(j, "q"));
    if (td.p * td.q != key.modulus || td.p == td.q || td.p % 4 != 3 || td.q % 4 != 3) {
      throw ValidationError("trapdoor does not factor the modulus into Blum primes");
    }
    return td;
  }
  td.shift = require(j, "shift").get<std::uint32_t>();
  td.inverse = require(j, "inverse").get<std::vector<std::uint32_t>>();
  const std::size_t n = key.domain_bits;
  if (td.inverse.size() != (std::size_t{1} << (n - 1)) || (td.shift >> (n - 1)) != 1) {
    throw ValidationError("toy trapdoor has the wrong shape");
  }
  for (std::size_t y = 0; y < td.inverse.size(); ++y) {
    const auto x0 = td.inverse[y];
    if ((x0 >> (n - 1)) != 0 || key.table[x0] != y || key.table[x0 ^ td.shift] != y) {
      throw ValidationError("toy trapdoor is inconsistent with the table");
    }
  }
  return td;
}

BigInt to_bigint(const BitString& bits) {
  BigInt out = 0;
  const auto& words = bits.words();
  for (std::size_t k = words.size(); k-- > 0;) {
    out <<= 64;
    out |= BigInt(words[k]);
  }
  return out;
}

BitString from_bigint(const BigInt& value, std::size_t n_bits) {
  if (value < 0 || bit_length(value) > n_bits) {
    throw ValidationError("integer does not fit in " + std::to_string(n_bits) + " bits");
  }
  BitString out(n_bits);
  for (std::size_t i = 0; i < n_bits; ++i) {
    if (boost::multiprecision::bit_test(value, static_cast<unsigned>(i))) out.set(i, true);
  }
  return out;
}

int jacobi(BigInt a, BigInt n) {
  if (n <= 0 || n % 2 == 0) throw ValidationError("Jacobi symbol needs an odd positive modulus");
  a %= n;
  if (a < 0) a += n;
  int result = 1;
  while (a != 0) {
    while (a % 2 == 0) {
      a /= 2;
      const unsigned r = static_cast<unsigned>(n % 8);
      if (r == 3 || r == 5) result = -result;
    }
    std::swap(a, n);
    if (a % 4 == 3 && n % 4 == 3) result = -result;
    a %= n;
  }
  return n == 1 ? result : 0;
}

bool is_blum_prime(const BigInt& p, Rng& rng) {
  if (p < 3 || p % 4 != 3) return false;
  return boost::multiprecision::miller_rabin_test(p, 25, rng);
}

}  // namespace qkit::tcf
