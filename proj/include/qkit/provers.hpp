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

#ifndef QKIT_PROVERS_HPP
#define QKIT_PROVERS_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "qkit/json.hpp"
#include "qkit/protocol.hpp"
#include "qkit/qsim.hpp"
#include "qkit/tcf.hpp"

namespace qkit::provers {

using protocol::Message;
using protocol::ProtocolId;

enum class ProverKind { kHonestQuantum, kOptimalClassical };

std::string to_string(ProverKind kind);
ProverKind prover_kind_from_string(const std::string& name);

/// Measurement angles of the honest prover's residual qubit.
inline constexpr double kThetaChallenge0 = 0.39269908169872414;   // pi/8
inline constexpr double kThetaChallenge1 = -0.39269908169872414;  // -pi/8

std::unique_ptr<protocol::Prover> make_prover(ProtocolId id, ProverKind kind);

/// Prepares the claw a quantum prover would obtain by measuring the image
/// register of sum_x |x>|f(x)>: x uniform, then its partner. For Rabin keys
/// the partner is found by factoring N, which limits moduli to 64 bits.
tcf::Claw sample_claw(const tcf::TcfKey& key, Rng& rng);

/// Nontrivial factorization of an odd semiprime below 2^64 (Pollard rho).
std::pair<std::uint64_t, std::uint64_t> factor_semiprime(std::uint64_t n);

/// Arbitrary Phase-B prover: a state and one two-outcome projective
/// measurement per challenge. projM is the projector for answer b = 0.
struct Device {
  Eigen::VectorXcd state;
  Eigen::MatrixXcd proj0;
  Eigen::MatrixXcd proj1;

  std::size_t dim() const { return static_cast<std::size_t>(state.size()); }
  const Eigen::MatrixXcd& projector(int m) const { return m == 0 ? proj0 : proj1; }
  /// Throws ValidationError unless the dimensions agree (D <= kMaxDeviceDim),
  /// the state is a unit vector and both matrices are projectors.
  void validate() const;
};

inline constexpr std::size_t kMaxDeviceDim = 64;

/// {"dim": D, "state": [[re,im],...], "proj0": [[[re,im],...],...], "proj1": ...}
Json device_to_json(const Device& device);
Device device_from_json(const Json& j);

/// Two-dimensional device with state |0>, proj0 = |pi/8><pi/8| and
/// proj1 = |-pi/8><-pi/8|. Optimal for c_hat0 = c_hat1 = +1.
Device canonical_optimal_device();

/// Projector onto the outcome that matches c_hat for challenge m.
Eigen::MatrixXcd correct_projector(const Device& device, int m, int c_hat);

struct PhaseBOutcome {
  int b = 0;
  Eigen::VectorXcd post;
};

PhaseBOutcome device_phase_b(const Device& device, int m, Rng& rng);

struct DeviceOutcomePair {
  int b0 = 0;
  int b1 = 0;
  int parity = 0;
};

/// Measures challenge 0 then challenge 1 on the post-measurement state.
DeviceOutcomePair parity_adversary(const Device& device, int c_hat0, int c_hat1, Rng& rng);

/// (-1)^{b0 ^ b1} = c_hat0 * c_hat1.
bool parity_correct(const DeviceOutcomePair& pair, int c_hat0, int c_hat1);

}  // namespace qkit::provers

#endif  // QKIT_PROVERS_HPP
