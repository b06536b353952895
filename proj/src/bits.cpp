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

#include "qkit/bits.hpp"

#include <bit>
#include <cctype>

#include "qkit/errors.hpp"

namespace qkit {
namespace {

constexpr std::size_t word_count(std::size_t n_bits) { return (n_bits + 63) / 64; }

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  const char lower = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower >= 'a' && lower <= 'f') return lower - 'a' + 10;
  return -1;
}

}  // namespace

BitString::BitString(std::size_t n_bits) : n_bits_(n_bits), words_(word_count(n_bits), 0) {}

BitString BitString::from_uint(std::uint64_t value, std::size_t n_bits) {
  BitString out(n_bits);
  if (n_bits < 64 && (value >> n_bits) != 0) {
    throw ValidationError("value does not fit in " + std::to_string(n_bits) + " bits");
  }
  if (!out.words_.empty()) out.words_[0] = value;
  return out;
}

BitString BitString::from_hex(std::string_view hex, std::size_t n_bits) {
  if (hex.size() % 2 != 0) throw ValidationError("hex bit string must have an even length");
  if (hex.size() / 2 != (n_bits + 7) / 8) {
    throw ValidationError("hex length does not match n_bits=" + std::to_string(n_bits));
  }
  BitString out(n_bits);
  for (std::size_t k = 0; k < hex.size() / 2; ++k) {
    const int hi = hex_value(hex[2 * k]);
    const int lo = hex_value(hex[2 * k + 1]);
    if (hi < 0 || lo < 0) throw ValidationError("invalid hex digit in bit string");
    const std::uint64_t byte = static_cast<std::uint64_t>(hi * 16 + lo);
    out.words_[k / 8] |= byte << (8 * (k % 8));
  }
  if (n_bits % 64 != 0 && !out.words_.empty() &&
      (out.words_.back() >> (n_bits % 64)) != 0) {
    throw ValidationError("hex bit string has bits set beyond n_bits");
  }
  return out;
}

bool BitString::get(std::size_t i) const {
  if (i >= n_bits_) throw ValidationError("bit index out of range");
  return (words_[i / 64] >> (i % 64)) & 1U;
}

void BitString::set(std::size_t i, bool value) {
  if (i >= n_bits_) throw ValidationError("bit index out of range");
  const std::uint64_t mask = std::uint64_t{1} << (i % 64);
  if (value) {
    words_[i / 64] |= mask;
  } else {
    words_[i / 64] &= ~mask;
  }
}

void BitString::flip(std::size_t i) { set(i, !get(i)); }

bool BitString::any() const {
  for (auto w : words_) {
    if (w != 0) return true;
  }
  return false;
}

std::size_t BitString::popcount() const {
  std::size_t total = 0;
  for (auto w : words_) total += static_cast<std::size_t>(std::popcount(w));
  return total;
}

void BitString::check_same_size(const BitString& other) const {
  if (other.n_bits_ != n_bits_) {
    throw ValidationError("bit string length mismatch: " + std::to_string(n_bits_) +
                          " vs " + std::to_string(other.n_bits_));
  }
}

int BitString::dot(const BitString& other) const {
  check_same_size(other);
  std::uint64_t acc = 0;
  for (std::size_t k = 0; k < words_.size(); ++k) acc ^= words_[k] & other.words_[k];
  return std::popcount(acc) & 1;
}

BitString BitString::operator^(const BitString& other) const {
  BitString out = *this;
  out ^= other;
  return out;
}

BitString& BitString::operator^=(const BitString& other) {
  check_same_size(other);
  for (std::size_t k = 0; k < words_.size(); ++k) words_[k] ^= other.words_[k];
  return *this;
}

BitString BitString::concat(const BitString& high) const {
  BitString out(n_bits_ + high.n_bits_);
  out.words_.assign(word_count(out.n_bits_), 0);
  for (std::size_t k = 0; k < words_.size(); ++k) out.words_[k] = words_[k];
  for (std::size_t i = 0; i < high.n_bits_; ++i) {
    if (high.get(i)) out.set(n_bits_ + i, true);
  }
  return out;
}

BitString BitString::slice(std::size_t begin, std::size_t length) const {
  if (begin + length > n_bits_) throw ValidationError("bit slice out of range");
  BitString out(length);
  for (std::size_t i = 0; i < length; ++i) {
    if (get(begin + i)) out.set(i, true);
  }
  return out;
}

std::uint64_t BitString::to_uint() const {
  for (std::size_t k = 1; k < words_.size(); ++k) {
    if (words_[k] != 0) throw ValidationError("bit string value exceeds 64 bits");
  }
  return words_.empty() ? 0 : words_[0];
}

std::string BitString::to_hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  const std::size_t n_bytes = (n_bits_ + 7) / 8;
  std::string out;
  out.reserve(2 * n_bytes);
  for (std::size_t k = 0; k < n_bytes; ++k) {
    const auto byte = static_cast<unsigned>((words_[k / 8] >> (8 * (k % 8))) & 0xff);
    out.push_back(kDigits[byte >> 4]);
    out.push_back(kDigits[byte & 0xf]);
  }
  return out;
}

std::string BitString::to_binary() const {
  std::string out;
  out.reserve(n_bits_);
  for (std::size_t i = n_bits_; i-- > 0;) out.push_back(get(i) ? '1' : '0');
  return out;
}

BitString random_bitstring(std::size_t n_bits, Rng& rng) {
  BitString out(n_bits);
  for (std::size_t k = 0; k < out.words_.size(); ++k) out.words_[k] = rng();
  if (n_bits % 64 != 0 && !out.words_.empty()) {
    out.words_.back() &= (std::uint64_t{1} << (n_bits % 64)) - 1;
  }
  return out;
}

}  // namespace qkit
