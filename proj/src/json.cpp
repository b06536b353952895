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

#include "qkit/json.hpp"

#include "qkit/errors.hpp"

namespace qkit {

Json bits_to_json(const BitString& bits) {
  Json j;
  j["n_bits"] = bits.size();
  j["hex"] = bits.to_hex();
  return j;
}

BitString bits_from_json(const Json& j) {
  if (!j.is_object()) throw ValidationError("bit string must be a JSON object");
  const Json& n = require(j, "n_bits");
  if (!n.is_number_unsigned()) throw ValidationError("n_bits must be a non-negative integer");
  return BitString::from_hex(require_string(j, "hex"), n.get<std::size_t>());
}

const Json& require(const Json& j, std::string_view field) {
  if (!j.is_object()) throw ValidationError("expected a JSON object");
  const auto it = j.find(std::string(field));
  if (it == j.end()) throw ValidationError("missing field '" + std::string(field) + "'");
  return *it;
}

int require_bit(const Json& j, std::string_view field) {
  const Json& v = require(j, field);
  if (!v.is_number_integer() || (v.get<long long>() != 0 && v.get<long long>() != 1)) {
    throw ValidationError("field '" + std::string(field) + "' must be 0 or 1");
  }
  return v.get<int>();
}

std::string require_string(const Json& j, std::string_view field) {
  const Json& v = require(j, field);
  if (!v.is_string()) throw ValidationError("field '" + std::string(field) + "' must be a string");
  return v.get<std::string>();
}

}  // namespace qkit
