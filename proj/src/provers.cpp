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

#include "qkit/provers.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "qkit/errors.hpp"
#include "qkit/mock_qhe.hpp"
#include "qkit/protocols.hpp"

namespace qkit::provers {
namespace {

using protocol::message_type;
using protocol::parse_bits;
namespace qhe = protocol::qhe;
using Complex = std::complex<double>;

const std::string kVerifier = "verifier";

__extension__ typedef unsigned __int128 Wide;

std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t n) {
  return static_cast<std::uint64_t>(static_cast<Wide>(a) * b % n);
}

Eigen::Vector2cd ket(double theta) { return {std::cos(theta), std::sin(theta)}; }

Eigen::Matrix2cd ray(double theta) {
  const Eigen::Vector2cd v = ket(theta);
  return v * v.adjoint();
}

Eigen::MatrixXcd kron(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
  Eigen::MatrixXcd out(4, 4);
  for (int i = 0; i < 2; ++i) {
    for (int k = 0; k < 2; ++k) out.block(2 * i, 2 * k, 2, 2) = a(i, k) * b;
  }
  return out;
}

int challenge_of(const Message& msg) {
  try {
    return require_bit(msg, "m");
  } catch (const ValidationError& e) {
    throw ProtocolViolation(kVerifier, e.what());
  }
}

tcf::TcfKey key_of(const Message& msg) { return protocol::parse_key_message(msg); }

[[noreturn]] void unexpected(const Message& msg) {
  throw ProtocolViolation(kVerifier, "unexpected message '" + message_type(msg) + "'");
}

// Shared prover state for the two claw-based protocols.
class ClawProverBase : public protocol::Prover {
 protected:
  std::optional<tcf::TcfKey> key_;

  const tcf::TcfKey& key(const Message& msg) const {
    if (!key_) unexpected(msg);
    return *key_;
  }
};

class HonestClawProver final : public ClawProverBase {
 public:
  explicit HonestClawProver(ProtocolId id) : id_(id) {}
  ProtocolId protocol() const override { return id_; }

  std::optional<Message> respond(const Message& msg, Rng& rng) override {
    const std::string type = message_type(msg);
    if (type == "key") {
      key_ = key_of(msg);
      const tcf::Claw claw = sample_claw(*key_, rng);
      state_ = qsim::superpose_claw(claw);
      return protocol::y_message(claw.y);
    }
    if (type == "verdict") {
      key_.reset();
      qubit_.reset();
      return std::nullopt;
    }
    if (type == "challenge") {
      if (!qubit_) unexpected(msg);
      const int m = challenge_of(msg);
      return protocol::response_message(
          qsim::measure_rotated(*qubit_, m == 0 ? kThetaChallenge0 : kThetaChallenge1, rng));
    }
    const std::size_t n = key(msg).domain_bits;
    if (id_ == ProtocolId::kSimplified && type == "r") {
      return collapse(parse_bits(msg, "r0", n, kVerifier), parse_bits(msg, "r1", n, kVerifier),
                      rng);
    }
    if (id_ == ProtocolId::kKcvy && type == "branch") {
      const std::string branch = msg.value("value", "");
      if (branch == "preimage") {
        return protocol::preimage_message(qsim::measure_register(state_, "x", rng).value);
      }
      if (branch == "equation") {
        const BitString r = parse_bits(msg, "r", n, kVerifier);
        return collapse(r, r, rng);
      }
      throw ProtocolViolation(kVerifier, "unknown branch '" + branch + "'");
    }
    unexpected(msg);
  }

 private:
  Message collapse(const BitString& r0, const BitString& r1, Rng& rng) {
    const tcf::TcfKey& k = *key_;
    const qsim::SparseState with_ip = qsim::append_inner_products(
        state_, r0, r1, [&k](const BitString& x) { return tcf::preimage_type(k, x); });
    const qsim::CollapseResult res = qsim::hadamard_collapse(with_ip, rng);
    qubit_ = res.qubit;
    return protocol::d_message(res.d);
  }

  ProtocolId id_;
  qsim::SparseState state_;
  std::optional<qsim::QubitState> qubit_;
};

// Reports a type-0 preimage, d = 0 and answers (m AND r_0.x).
class ClassicalClawProver final : public ClawProverBase {
 public:
  explicit ClassicalClawProver(ProtocolId id) : id_(id) {}
  ProtocolId protocol() const override { return id_; }

  std::optional<Message> respond(const Message& msg, Rng& rng) override {
    const std::string type = message_type(msg);
    if (type == "key") {
      key_ = key_of(msg);
      x_ = tcf::sample_domain_of_type(*key_, 0, rng);
      return protocol::y_message(tcf::eval(*key_, x_));
    }
    if (type == "verdict") {
      key_.reset();
      return std::nullopt;
    }
    if (type == "challenge") {
      const int m = challenge_of(msg);
      return protocol::response_message(m & k_);
    }
    const std::size_t n = key(msg).domain_bits;
    if (id_ == ProtocolId::kSimplified && type == "r") {
      k_ = parse_bits(msg, "r0", n, kVerifier).dot(x_);
      parse_bits(msg, "r1", n, kVerifier);
      return protocol::d_message(BitString(n));
    }
    if (id_ == ProtocolId::kKcvy && type == "branch") {
      const std::string branch = msg.value("value", "");
      if (branch == "preimage") return protocol::preimage_message(x_);
      if (branch == "equation") {
        k_ = parse_bits(msg, "r", n, kVerifier).dot(x_);
        return protocol::d_message(BitString(n));
      }
      throw ProtocolViolation(kVerifier, "unknown branch '" + branch + "'");
    }
    unexpected(msg);
  }

 private:
  ProtocolId id_;
  BitString x_;
  int k_ = 0;
};

// EPR pair; Alice measures Z (x = 0) or X (x = 1) under the encryption and
// Bob measures at angle +pi/8 (m = 0) or -pi/8 (m = 1).
class HonestKlvyProver final : public protocol::Prover {
 public:
  ProtocolId protocol() const override { return ProtocolId::kKlvyChsh; }

  std::optional<Message> respond(const Message& msg, Rng& rng) override {
    const std::string type = message_type(msg);
    if (type == "ciphertext") {
      qhe::MockCiphertext ct;
      try {
        ct = qhe::MockCiphertext::from_wire(msg);
      } catch (const ValidationError& e) {
        throw ProtocolViolation(kVerifier, e.what());
      }
      Eigen::Vector4cd epr = Eigen::Vector4cd::Zero();
      epr(0) = epr(3) = 1.0 / std::sqrt(2.0);
      psi_ = epr;
      const qhe::MockCiphertext answer = qhe::eval(ct, [this, &rng](int x) {
        const Eigen::MatrixXcd alice =
            kron(ray(x == 0 ? 0.0 : std::numbers::pi / 4), Eigen::Matrix2cd::Identity());
        const qsim::ProjectiveOutcome out = qsim::measure_projective(psi_, alice, rng);
        psi_ = out.post;
        return out.outcome;
      });
      return answer.to_wire();
    }
    if (type == "challenge") {
      if (psi_.size() != 4) unexpected(msg);
      const int m = challenge_of(msg);
      const Eigen::MatrixXcd bob = kron(
          Eigen::Matrix2cd::Identity(), ray(m == 0 ? kThetaChallenge0 : kThetaChallenge1));
      return protocol::response_message(qsim::measure_projective(psi_, bob, rng).outcome);
    }
    if (type == "verdict") {
      psi_.resize(0);
      return std::nullopt;
    }
    unexpected(msg);
  }

 private:
  Eigen::VectorXcd psi_;
};

class ClassicalKlvyProver final : public protocol::Prover {
 public:
  ProtocolId protocol() const override { return ProtocolId::kKlvyChsh; }

  std::optional<Message> respond(const Message& msg, Rng& rng) override {
    (void)rng;
    const std::string type = message_type(msg);
    if (type == "ciphertext") {
      try {
        return qhe::eval(qhe::MockCiphertext::from_wire(msg), [](int) { return 0; }).to_wire();
      } catch (const ValidationError& e) {
        throw ProtocolViolation(kVerifier, e.what());
      }
    }
    if (type == "challenge") {
      challenge_of(msg);
      return protocol::response_message(0);
    }
    if (type == "verdict") return std::nullopt;
    unexpected(msg);
  }
};

Json complex_to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

Complex complex_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ValidationError("complex entries must be [re, im]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

Json matrix_to_json(const Eigen::MatrixXcd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(complex_to_json(m(i, k)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXcd matrix_from_json(const Json& j, std::size_t dim, const char* name) {
  if (!j.is_array() || j.size() != dim) {
    throw ValidationError(std::string(name) + " must have " + std::to_string(dim) + " rows");
  }
  Eigen::MatrixXcd m(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) {
    if (!j[i].is_array() || j[i].size() != dim) {
      throw ValidationError(std::string(name) + " must be square");
    }
    for (std::size_t k = 0; k < dim; ++k) m(i, k) = complex_from_json(j[i][k]);
  }
  return m;
}

}  // namespace

std::string to_string(ProverKind kind) {
  return kind == ProverKind::kHonestQuantum ? "honest-quantum" : "optimal-classical";
}

ProverKind prover_kind_from_string(const std::string& name) {
  if (name == "honest-quantum" || name == "honest") return ProverKind::kHonestQuantum;
  if (name == "optimal-classical" || name == "classical") return ProverKind::kOptimalClassical;
  throw ValidationError("unknown prover '" + name + "'");
}

std::unique_ptr<protocol::Prover> make_prover(ProtocolId id, ProverKind kind) {
  if (id == ProtocolId::kKlvyChsh) {
    if (kind == ProverKind::kHonestQuantum) return std::make_unique<HonestKlvyProver>();
    return std::make_unique<ClassicalKlvyProver>();
  }
  if (kind == ProverKind::kHonestQuantum) return std::make_unique<HonestClawProver>(id);
  return std::make_unique<ClassicalClawProver>(id);
}

std::pair<std::uint64_t, std::uint64_t> factor_semiprime(std::uint64_t n) {
  if (n < 4) throw ValidationError("nothing to factor");
  for (std::uint64_t p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL}) {
    if (n % p == 0 && n != p) return {p, n / p};
  }
  for (std::uint64_t c = 1; c < 1000; ++c) {
    auto f = [&](std::uint64_t v) { return (mul_mod(v, v, n) + c) % n; };
    std::uint64_t x = 2, y = 2, d = 1;
    while (d == 1) {
      x = f(x);
      y = f(f(y));
      d = std::gcd(x > y ? x - y : y - x, n);
    }
    if (d != n) return {std::min(d, n / d), std::max(d, n / d)};
  }
  throw ValidationError("factorization failed");
}

tcf::Claw sample_claw(const tcf::TcfKey& key, Rng& rng) {
  const BitString x = tcf::sample_domain(key, rng);
  const BitString y = tcf::eval(key, x);
  if (key.family == tcf::Family::kToy) {
    const std::uint64_t xv = x.to_uint();
    const std::uint32_t yv = key.table[xv];
    for (std::uint64_t z = 0; z < key.table.size(); ++z) {
      if (z != xv && key.table[z] == yv) {
        const BitString partner = BitString::from_uint(z, key.domain_bits);
        if (tcf::preimage_type(key, x) == 0) return {x, partner, y};
        return {partner, x, y};
      }
    }
    throw ValidationError("toy table has no partner for x");
  }
  if (boost::multiprecision::msb(key.modulus) >= 64) {
    throw CapacityError("claw preparation is simulated only for moduli below 2^64");
  }
  const auto [p, q] = factor_semiprime(key.modulus.convert_to<std::uint64_t>());
  tcf::TcfTrapdoor td;
  td.p = p;
  td.q = q;
  return tcf::invert(td, key, y);
}

void Device::validate() const {
  const auto d = state.size();
  if (d == 0 || static_cast<std::size_t>(d) > kMaxDeviceDim) {
    throw ValidationError("device dimension must be in [1, " + std::to_string(kMaxDeviceDim) + "]");
  }
  if (proj0.rows() != d || proj1.rows() != d) throw ValidationError("device dimensions disagree");
  qsim::validate_state(state);
  qsim::validate_projector(proj0);
  qsim::validate_projector(proj1);
}

Json device_to_json(const Device& device) {
  Json j;
  j["dim"] = device.dim();
  Json state = Json::array();
  for (Eigen::Index i = 0; i < device.state.size(); ++i) state.push_back(complex_to_json(device.state(i)));
  j["state"] = state;
  j["proj0"] = matrix_to_json(device.proj0);
  j["proj1"] = matrix_to_json(device.proj1);
  return j;
}

Device device_from_json(const Json& j) {
  const Json& dim_j = require(j, "dim");
  if (!dim_j.is_number_unsigned()) throw ValidationError("dim must be a positive integer");
  const std::size_t dim = dim_j.get<std::size_t>();
  if (dim == 0 || dim > kMaxDeviceDim) {
    throw ValidationError("device dimension must be in [1, " + std::to_string(kMaxDeviceDim) + "]");
  }
  const Json& state = require(j, "state");
  if (!state.is_array() || state.size() != dim) throw ValidationError("state must have dim entries");
  Device device;
  device.state.resize(dim);
  for (std::size_t i = 0; i < dim; ++i) device.state(i) = complex_from_json(state[i]);
  device.proj0 = matrix_from_json(require(j, "proj0"), dim, "proj0");
  device.proj1 = matrix_from_json(require(j, "proj1"), dim, "proj1");
  device.validate();
  return device;
}

Device canonical_optimal_device() {
  Device device;
  device.state = Eigen::Vector2cd(1.0, 0.0);
  device.proj0 = ray(kThetaChallenge0);
  device.proj1 = ray(kThetaChallenge1);
  return device;
}

Eigen::MatrixXcd correct_projector(const Device& device, int m, int c_hat) {
  if (c_hat != 1 && c_hat != -1) throw ValidationError("c_hat must be +1 or -1");
  const Eigen::MatrixXcd& p = device.projector(m);
  if (c_hat == 1) return p;
  return Eigen::MatrixXcd::Identity(p.rows(), p.cols()) - p;
}

PhaseBOutcome device_phase_b(const Device& device, int m, Rng& rng) {
  if (m != 0 && m != 1) throw ValidationError("challenge must be a bit");
  device.validate();
  const qsim::ProjectiveOutcome out = qsim::measure_projective(device.state, device.projector(m), rng);
  return {out.outcome, out.post};
}

DeviceOutcomePair parity_adversary(const Device& device, int c_hat0, int c_hat1, Rng& rng) {
  if ((c_hat0 != 1 && c_hat0 != -1) || (c_hat1 != 1 && c_hat1 != -1)) {
    throw ValidationError("c_hat values must be +1 or -1");
  }
  device.validate();
  const qsim::ProjectiveOutcome first = qsim::measure_projective(device.state, device.proj0, rng);
  const qsim::ProjectiveOutcome second = qsim::measure_projective(first.post, device.proj1, rng);
  return {first.outcome, second.outcome, first.outcome ^ second.outcome};
}

bool parity_correct(const DeviceOutcomePair& pair, int c_hat0, int c_hat1) {
  return (pair.parity == 0 ? 1 : -1) == c_hat0 * c_hat1;
}

}  // namespace qkit::provers
