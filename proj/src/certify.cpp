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

#include "qkit/certify.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "qkit/bits.hpp"
#include "qkit/errors.hpp"
#include "qkit/protocols.hpp"

namespace qkit::certify {

namespace {

using protocol::ProtocolId;

int sign(int b) { return b ? -1 : 1; }

// Matches of the table (b0, b1) against (c_hat0, c_hat1), in half-points of success.
int matches(int c0, int c1, int table) {
  return (sign(table & 1) == c0) + (sign(table >> 1) == c1);
}

struct Fraction {
  std::uint64_t num;
  std::uint64_t den;
};

Fraction reduce(std::uint64_t num, std::uint64_t den) {
  const std::uint64_t g = std::gcd(num, den);
  return {num / g, den / g};
}

// Hidden outcomes of one toy instance: for the prover's preimage x and a
// shift s, the claw is ordered by the top bit (the public preimage type).
class ClawGame {
 public:
  ClawGame(ProtocolId id, std::size_t n) : id_(id), n_(n) {
    r_bits_ = id == ProtocolId::kSimplified ? 2 * n : n;
    for (std::uint64_t s = 1ULL << (n - 1); s < (1ULL << n); ++s) shifts_.push_back(s);
  }

  std::uint64_t domain() const { return 1ULL << n_; }
  std::uint64_t r_count() const { return 1ULL << r_bits_; }
  const std::vector<std::uint64_t>& shifts() const { return shifts_; }

  // Both c_hat values for one (x, s, r, d).
  std::pair<int, int> c_hats(std::uint64_t x, std::uint64_t s, std::uint64_t r,
                             std::uint64_t d) const {
    const std::uint64_t top = 1ULL << (n_ - 1);
    const std::uint64_t a = (x & top) ? (x ^ s) : x;
    const BitString x0 = BitString::from_uint(a, n_);
    const BitString x1 = BitString::from_uint(a ^ s, n_);
    const BitString dd = BitString::from_uint(d, n_);
    if (id_ == ProtocolId::kSimplified) {
      const BitString r0 = BitString::from_uint(r & (domain() - 1), n_);
      const BitString r1 = BitString::from_uint(r >> n_, n_);
      return {protocol::simplified_c_hat(r0, r1, x0, x1, dd, 0),
              protocol::simplified_c_hat(r0, r1, x0, x1, dd, 1)};
    }
    const BitString rr = BitString::from_uint(r, n_);
    return {protocol::kcvy_c_hat(rr, x0, x1, dd, 0), protocol::kcvy_c_hat(rr, x0, x1, dd, 1)};
  }

 private:
  ProtocolId id_;
  std::size_t n_;
  std::size_t r_bits_;
  std::vector<std::uint64_t> shifts_;
};

CeilingReport certify_claw(ProtocolId id, std::size_t n, ViewModel view) {
  const ClawGame g(id, n);
  CeilingReport rep;
  const std::uint64_t ns = g.shifts().size();
  const std::uint64_t nr = g.r_count();
  const std::uint64_t nd = g.domain();

  // score[s][r][d][t] is reused by every view model for a fixed x.
  std::vector<std::uint8_t> score(ns * nr * nd * 4);
  auto at = [&](std::uint64_t si, std::uint64_t r, std::uint64_t d, int t) -> std::uint8_t& {
    return score[((si * nr + r) * nd + d) * 4 + static_cast<std::uint64_t>(t)];
  };

  std::uint64_t best = 0;
  for (std::uint64_t x = 0; x < g.domain(); ++x) {
    for (std::uint64_t si = 0; si < ns; ++si) {
      for (std::uint64_t r = 0; r < nr; ++r) {
        for (std::uint64_t d = 0; d < nd; ++d) {
          const auto [c0, c1] = g.c_hats(x, g.shifts()[si], r, d);
          for (int t = 0; t < 4; ++t) at(si, r, d, t) = static_cast<std::uint8_t>(matches(c0, c1, t));
        }
      }
    }
    std::uint64_t value = 0;
    switch (view) {
      case ViewModel::kProverGenerated:
        for (std::uint64_t d = 0; d < nd; ++d) {
          for (int t = 0; t < 4; ++t) {
            std::uint64_t sum = 0;
            for (std::uint64_t si = 0; si < ns; ++si) {
              for (std::uint64_t r = 0; r < nr; ++r) sum += at(si, r, d, t);
            }
            value = std::max(value, sum);
            ++rep.evaluations;
          }
        }
        break;
      case ViewModel::kFullTranscript:
        for (std::uint64_t r = 0; r < nr; ++r) {
          std::uint64_t inner = 0;
          for (std::uint64_t d = 0; d < nd; ++d) {
            for (int t = 0; t < 4; ++t) {
              std::uint64_t sum = 0;
              for (std::uint64_t si = 0; si < ns; ++si) sum += at(si, r, d, t);
              inner = std::max(inner, sum);
              ++rep.evaluations;
            }
          }
          value += inner;
        }
        break;
      case ViewModel::kKeyLeaked:
        for (std::uint64_t si = 0; si < ns; ++si) {
          for (std::uint64_t r = 0; r < nr; ++r) {
            std::uint64_t inner = 0;
            for (std::uint64_t d = 0; d < nd; ++d) {
              for (int t = 0; t < 4; ++t) {
                inner = std::max<std::uint64_t>(inner, at(si, r, d, t));
                ++rep.evaluations;
              }
            }
            value += inner;
          }
        }
        break;
    }
    best = std::max(best, value);
  }
  const Fraction f = reduce(best, 2 * ns * nr);
  rep.numerator = f.num;
  rep.denominator = f.den;
  return rep;
}

CeilingReport certify_klvy(ViewModel view) {
  CeilingReport rep;
  // Classical answer functions a = f(x): 0, 1, x, not x.
  auto answer = [](int f, int x) { return f < 2 ? f : (f == 2 ? x : 1 - x); };
  auto score = [&](int f, int x, int t) {
    const int a = answer(f, x);
    return matches(protocol::klvy_c_hat(x, a, 0), protocol::klvy_c_hat(x, a, 1), t);
  };
  std::uint64_t best = 0;
  if (view == ViewModel::kKeyLeaked) {
    for (int x = 0; x < 2; ++x) {
      int inner = 0;
      for (int f = 0; f < 4; ++f) {
        for (int t = 0; t < 4; ++t) {
          inner = std::max(inner, score(f, x, t));
          ++rep.evaluations;
        }
      }
      best += static_cast<std::uint64_t>(inner);
    }
  } else {
    // The ciphertext hides x, so the full transcript adds nothing.
    for (int f = 0; f < 4; ++f) {
      for (int t = 0; t < 4; ++t) {
        best = std::max<std::uint64_t>(best, static_cast<std::uint64_t>(score(f, 0, t) + score(f, 1, t)));
        ++rep.evaluations;
      }
    }
  }
  const Fraction fr = reduce(best, 4);
  rep.numerator = fr.num;
  rep.denominator = fr.den;
  return rep;
}

}  // namespace

std::string to_string(ViewModel view) {
  switch (view) {
    case ViewModel::kProverGenerated:
      return "prover-generated";
    case ViewModel::kFullTranscript:
      return "full-transcript";
    case ViewModel::kKeyLeaked:
      return "key-leaked";
  }
  return "?";
}

ViewModel view_from_string(const std::string& name) {
  for (ViewModel v :
       {ViewModel::kProverGenerated, ViewModel::kFullTranscript, ViewModel::kKeyLeaked}) {
    if (name == to_string(v)) return v;
  }
  throw ValidationError("unknown view model '" + name +
                        "' (expected prover-generated, full-transcript or key-leaked)");
}

Json CeilingReport::to_json() const {
  Json j;
  j["protocol"] = protocol::to_string(protocol);
  j["view"] = to_string(view);
  j["n_bits"] = n_bits;
  j["max_success"] = std::to_string(numerator) + "/" + std::to_string(denominator);
  j["value"] = value;
  j["evaluations"] = evaluations;
  j["parity_leaked"] = parity_leaked;
  return j;
}

CeilingReport certify_classical_ceiling(ProtocolId id, std::size_t n_bits, ViewModel view) {
  CeilingReport rep;
  if (id == ProtocolId::kKlvyChsh) {
    rep = certify_klvy(view);
    n_bits = 0;
  } else {
    if (n_bits < 2) throw ValidationError("certification needs n_bits >= 2");
    if (n_bits > kMaxCertifyBits) {
      throw CapacityError("enumeration budget exceeded: n_bits " + std::to_string(n_bits) +
                          " > " + std::to_string(kMaxCertifyBits));
    }
    rep = certify_claw(id, n_bits, view);
  }
  rep.protocol = id;
  rep.view = view;
  rep.n_bits = n_bits;
  rep.value = static_cast<double>(rep.numerator) / static_cast<double>(rep.denominator);
  // Exact comparison with 3/4.
  rep.parity_leaked = 4 * rep.numerator > 3 * rep.denominator;
  return rep;
}

}  // namespace qkit::certify
