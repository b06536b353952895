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

#ifndef QKIT_BITS_HPP
#define QKIT_BITS_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "qkit/rng.hpp"

namespace qkit {

/// Fixed-length bit string. Bit i is stored at word i / 64, position i % 64,
/// so the integer value of a string is sum(bit_i * 2^i).
class BitString {
 public:
  BitString() = default;
  explicit BitString(std::size_t n_bits);

  static BitString from_uint(std::uint64_t value, std::size_t n_bits);
  /// Little-endian hex: byte k holds bits 8k..8k+7, emitted in increasing k.
  static BitString from_hex(std::string_view hex, std::size_t n_bits);

  std::size_t size() const { return n_bits_; }
  bool get(std::size_t i) const;
  void set(std::size_t i, bool value);
  void flip(std::size_t i);

  bool any() const;
  std::size_t popcount() const;

  /// Inner product mod 2. Both strings must have the same length.
  int dot(const BitString& other) const;

  BitString operator^(const BitString& other) const;
  BitString& operator^=(const BitString& other);

  /// this || other: the result's low bits are this string.
  BitString concat(const BitString& high) const;
  BitString slice(std::size_t begin, std::size_t length) const;

  std::uint64_t to_uint() const;
  std::string to_hex() const;
  /// Most-significant bit first, for diagnostics.
  std::string to_binary() const;

  const std::vector<std::uint64_t>& words() const { return words_; }

  friend bool operator==(const BitString&, const BitString&) = default;
  friend auto operator<=>(const BitString&, const BitString&) = default;

 private:
  friend BitString random_bitstring(std::size_t n_bits, Rng& rng);
  void check_same_size(const BitString& other) const;

  std::size_t n_bits_ = 0;
  std::vector<std::uint64_t> words_;
};

/// Uniform n-bit string.
BitString random_bitstring(std::size_t n_bits, Rng& rng);

}  // namespace qkit

#endif  // QKIT_BITS_HPP
