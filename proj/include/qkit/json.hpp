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

#ifndef QKIT_JSON_HPP
#define QKIT_JSON_HPP

#include <string>
#include <string_view>

#include <json.hpp>

#include "qkit/bits.hpp"

namespace qkit {

/// Insertion-ordered so that emitted records follow the documented field order.
using Json = nlohmann::ordered_json;

/// {"n_bits": n, "hex": "<little-endian hex>"}
Json bits_to_json(const BitString& bits);
BitString bits_from_json(const Json& j);

/// Field accessors that throw ValidationError naming the missing/bad field.
const Json& require(const Json& j, std::string_view field);
int require_bit(const Json& j, std::string_view field);
std::string require_string(const Json& j, std::string_view field);

}  // namespace qkit

#endif  // QKIT_JSON_HPP
