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

#include "qkit/qsim.hpp"

#include <cmath>

#include "qkit/errors.hpp"

namespace qkit::qsim {

SparseState::SparseState(std::vector<Register> layout) : layout_(std::move(layout)) {}

std::size_t SparseState::register_index(const std::string& name) const {
  for (std::size_t k = 0; k < layout_.size(); ++k) {
    if (layout_[k].name == name) return k;
  }
  throw ValidationError("no register named '" + name + "'");
}

void SparseState::add(const Label& label, Complex amp) {
  if (label.size() != layout_.size()) throw ValidationError("label does not match layout");
  for (std::size_t k = 0; k < label.size(); ++k) {
    if (label[k].size() != layout_[k].width) {
      throw ValidationError("label width mismatch in register '" + layout_[k].name + "'");
    }
  }
  auto [it, inserted] = amps_.try_emplace(label, 0.0);
  it->second += amp;
  if (std::abs(it->second) < kPruneTolerance) amps_.erase(it);
}

double SparseState::norm_squared() const {
  double total = 0.0;
  for (const auto& [label, amp] : amps_) total += std::norm(amp);
  return total;
}

void SparseState::check_normalized(double tol) const {
  const double n2 = norm_squared();
  if (std::abs(n2 - 1.0) > tol) {
    throw ValidationError("state is not normalized (norm^2 = " + std::to_string(n2) + ")");
  }
}

SparseState superpose_claw(const tcf::Claw& claw) {
  if (claw.x0 == claw.x1) throw ValidationError("invalid claw: x0 equals x1");
  if (claw.x0.size() != claw.x1.size()) throw ValidationError("invalid claw: width mismatch");
  SparseState state({{"x", claw.x0.size()}});
  const double h = 1.0 / std::sqrt(2.0);
  state.add({claw.x0}, h);
  state.add({claw.x1}, h);
  return state;
}

SparseState append_inner_products(const SparseState& state, const BitString& r0,
                                  const BitString& r1, const TypeOracle& type_fn) {
  std::vector<Register> layout = state.layout();
  const std::size_t xi = state.register_index("x");
  if (r0.size() != layout[xi].width || r1.size() != layout[xi].width) {
    throw ValidationError("r0/r1 width does not match the x register");
  }
  layout.push_back({"ip", 1});
  SparseState out(layout);
  for (const auto& [label, amp] : state.amplitudes()) {
    const BitString& x = label[xi];
    const int t = type_fn(x);
    if (t != 0 && t != 1) throw ValidationError("type oracle returned a non-bit");
    Label extended = label;
    extended.push_back(BitString::from_uint(static_cast<std::uint64_t>((t == 0 ? r0 : r1).dot(x)), 1));
    out.add(extended, amp);
  }
  return out;
}

CollapseResult hadamard_collapse(const SparseState& state, Rng& rng) {
  const auto& layout = state.layout();
  if (layout.size() != 2 || layout[0].name != "x" || layout[1].name != "ip" ||
      layout[1].width != 1) {
    throw ValidationError("hadamard_collapse expects registers (x, ip)");
  }
  if (state.size() != 2) throw ValidationError("hadamard_collapse expects exactly two branches");
  state.check_normalized();
  auto it = state.amplitudes().begin();
  const BitString x0 = it->first[0];
  const int c0 = it->first[1].get(0) ? 1 : 0;
  const Complex a0 = it->second;
  ++it;
  const BitString x1 = it->first[0];
  const int c1 = it->first[1].get(0) ? 1 : 0;
  const Complex a1 = it->second;
  if (x0 == x1) throw ValidationError("branches share the same x");
  const BitString s = x0 ^ x1;
  const std::size_t n = x0.size();

  BitString d(n);
  for (std::size_t i = 0; i < n; ++i) d.set(i, rng.bit() != 0);

  CollapseResult result;
  if (c0 != c1) {
    // Orthogonal ip values: every d has probability 2^-n.
    const Complex phase = (d.dot(s) != 0) ? -1.0 : 1.0;
    Complex amp[2];
    amp[c0] = a0;
    amp[c1] = phase * a1;
    result.qubit = {amp[0], amp[1]};
  } else {
    // Same ip value: beta = d.s is biased by interference, d uniform on its coset.
    const double p0 = std::norm(a0 + a1) / 2.0;
    const int beta = rng.uniform() < p0 ? 0 : 1;
    if (d.dot(s) != beta) {
      std::size_t pivot = 0;
      while (!s.get(pivot)) ++pivot;
      d.flip(pivot);
    }
    result.qubit = c0 == 0 ? QubitState{1.0, 0.0} : QubitState{0.0, 1.0};
  }
  result.d = d;
  return result;
}

double rotated_zero_probability(const QubitState& q, double theta) {
  const double n2 = std::norm(q.a0) + std::norm(q.a1);
  if (std::abs(n2 - 1.0) > kNormTolerance) throw ValidationError("qubit state is not normalized");
  return std::norm(std::cos(theta) * q.a0 + std::sin(theta) * q.a1);
}

int measure_rotated(const QubitState& q, double theta, Rng& rng) {
  return rng.uniform() < rotated_zero_probability(q, theta) ? 0 : 1;
}

RegisterOutcome measure_register(const SparseState& state, const std::string& name, Rng& rng) {
  state.check_normalized();
  const std::size_t idx = state.register_index(name);
  std::map<BitString, double> probs;
  for (const auto& [label, amp] : state.amplitudes()) probs[label[idx]] += std::norm(amp);
  double u = rng.uniform() * state.norm_squared();
  auto chosen = probs.begin();
  for (auto it = probs.begin(); it != probs.end(); ++it) {
    chosen = it;
    if (u < it->second) break;
    u -= it->second;
  }
  RegisterOutcome out{chosen->first, SparseState(state.layout())};
  const double scale = 1.0 / std::sqrt(chosen->second);
  for (const auto& [label, amp] : state.amplitudes()) {
    if (label[idx] == chosen->first) out.post.add(label, amp * scale);
  }
  return out;
}

void validate_state(const Eigen::VectorXcd& psi, double tol) {
  if (psi.size() == 0) throw ValidationError("state vector is empty");
  if (!psi.allFinite()) throw ValidationError("state vector has non-finite entries");
  if (std::abs(psi.squaredNorm() - 1.0) > tol) throw ValidationError("state vector is not normalized");
}

void validate_projector(const Eigen::MatrixXcd& p, double tol) {
  if (p.rows() != p.cols() || p.rows() == 0) throw ValidationError("projector must be square");
  if (!p.allFinite()) throw ValidationError("projector has non-finite entries");
  if ((p - p.adjoint()).cwiseAbs().maxCoeff() > tol) {
    throw ValidationError("projector is not Hermitian");
  }
  if ((p * p - p).cwiseAbs().maxCoeff() > tol) throw ValidationError("projector is not idempotent");
}

ProjectiveOutcome measure_projective(const Eigen::VectorXcd& psi, const Eigen::MatrixXcd& p,
                                     Rng& rng) {
  validate_state(psi);
  validate_projector(p);
  if (p.rows() != psi.size()) throw ValidationError("projector and state dimensions differ");
  const Eigen::VectorXcd hit = p * psi;
  const double p0 = hit.squaredNorm();
  ProjectiveOutcome out;
  out.outcome = rng.uniform() < p0 ? 0 : 1;
  Eigen::VectorXcd post = out.outcome == 0 ? hit : Eigen::VectorXcd(psi - hit);
  out.post = post / post.norm();
  return out;
}

}  // namespace qkit::qsim
