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

#ifndef QKIT_RNG_HPP
#define QKIT_RNG_HPP

#include <cstdint>
#include <limits>

namespace qkit {

/// Mixing function of SplitMix64 (Steele, Lea, Flood 2014).
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based SplitMix64 generator: output k is mix(key + k * gamma).
/// Streams are keyed by hash(seed, trial, lane), so every trial owns an
/// independent, reproducible stream regardless of scheduling.
///
/// Satisfies std::uniform_random_bit_generator.
class Rng {
 public:
  using result_type = std::uint64_t;

  /// Stream lanes used by the protocol harness.
  enum class Lane : std::uint64_t { kVerifier = 0, kProver = 1, kAux = 2 };

  explicit Rng(std::uint64_t key) : key_(key) {}

  static Rng stream(std::uint64_t seed, std::uint64_t trial,
                    Lane lane = Lane::kAux) {
    std::uint64_t h = splitmix64_mix(seed ^ 0x6a09e667f3bcc909ULL);
    h = splitmix64_mix(h ^ (trial + 0x9e3779b97f4a7c15ULL));
    h = splitmix64_mix(h ^ (static_cast<std::uint64_t>(lane) + 0xbb67ae8584caa73bULL));
    return Rng(h);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    ++counter_;
    return splitmix64_mix(key_ + counter_ * 0x9e3779b97f4a7c15ULL);
  }

  /// Uniform in [0, 1) with 53 bits of precision.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  int bit() { return static_cast<int>((*this)() >> 63); }

  /// Uniform in [0, bound) by rejection; bound must be positive.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = max() - max() % bound;
    std::uint64_t v;
    do {
      v = (*this)();
    } while (v >= limit);
    return v % bound;
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Child stream; the parent advances by one draw.
  Rng split() { return Rng(splitmix64_mix((*this)() ^ key_)); }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace qkit

#endif  // QKIT_RNG_HPP
