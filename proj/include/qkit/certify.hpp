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

#ifndef QKIT_CERTIFY_HPP
#define QKIT_CERTIFY_HPP

#include <cstddef>
#include <cstdint>
#include <string>

#include "qkit/json.hpp"
#include "qkit/protocol.hpp"

/// Exact classical ceiling of Phase B by exhaustive enumeration.
///
/// A deterministic classical prover is a Phase-A behaviour plus a response
/// table (b0, b1) for every view. The ceiling is the best average success
/// over all verifier coins the view does not contain. Arithmetic is on
/// integer counts, so the result is an exact fraction.
namespace qkit::certify {

/// Which coins the Phase-B strategy may depend on.
///  - prover-generated: only what the prover itself produced in Phase A
///    (its preimage x and answer d; for KLVY its answer function). This is
///    the view the soundness argument leaves the prover when the verifier's
///    strings and the claw are hidden.
///  - full-transcript: additionally the verifier's public strings r.
///  - key-leaked: additionally the secret (the claw shift s, or KLVY's x).
///    A sanity control: the parity becomes predictable.
enum class ViewModel { kProverGenerated, kFullTranscript, kKeyLeaked };

std::string to_string(ViewModel view);
ViewModel view_from_string(const std::string& name);

/// Largest toy domain width the enumeration accepts.
inline constexpr std::size_t kMaxCertifyBits = 3;

struct CeilingReport {
  protocol::ProtocolId protocol = protocol::ProtocolId::kSimplified;
  ViewModel view = ViewModel::kProverGenerated;
  std::size_t n_bits = 0;
  std::uint64_t numerator = 0;
  std::uint64_t denominator = 1;
  double value = 0.0;
  /// (Phase-A choice, view, table) combinations scored.
  std::uint64_t evaluations = 0;
  /// value > 3/4: the view determines the parity c_hat0 * c_hat1 too often.
  bool parity_leaked = false;

  Json to_json() const;
};

/// n_bits is the toy domain width (2..3) and is ignored for KLVY-CHSH.
/// Throws CapacityError past kMaxCertifyBits.
CeilingReport certify_classical_ceiling(protocol::ProtocolId id, std::size_t n_bits,
                                        ViewModel view = ViewModel::kProverGenerated);

}  // namespace qkit::certify

#endif  // QKIT_CERTIFY_HPP
