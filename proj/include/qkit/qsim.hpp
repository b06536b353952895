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

#ifndef QKIT_QSIM_HPP
#define QKIT_QSIM_HPP

#include <complex>
#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qkit/bits.hpp"
#include "qkit/rng.hpp"
#include "qkit/tcf.hpp"

/// Sparse state-vector simulation for the honest prover pipeline.
namespace qkit::qsim {

using Complex = std::complex<double>;

/// Amplitudes with modulus below this are dropped.
inline constexpr double kPruneTolerance = 1e-14;
/// Accepted deviation of a norm from 1.
inline constexpr double kNormTolerance = 1e-10;
/// Accepted deviation of P^2 = P = P^dagger, entrywise.
inline constexpr double kProjectorTolerance = 1e-10;

struct Register {
  std::string name;
  std::size_t width = 0;
};

/// One bit string per register, in layout order.
using Label = std::vector<BitString>;

class SparseState {
 public:
  SparseState() = default;
  explicit SparseState(std::vector<Register> layout);

  const std::vector<Register>& layout() const { return layout_; }
  std::size_t register_index(const std::string& name) const;

  /// Adds amp to the amplitude of label, pruning the result if it vanishes.
  void add(const Label& label, Complex amp);
  const std::map<Label, Complex>& amplitudes() const { return amps_; }
  std::size_t size() const { return amps_.size(); }

  double norm_squared() const;
  /// Throws ValidationError unless |norm^2 - 1| <= tol.
  void check_normalized(double tol = kNormTolerance) const;

 private:
  std::vector<Register> layout_;
  std::map<Label, Complex> amps_;
};

struct QubitState {
  Complex a0{1.0, 0.0};
  Complex a1{0.0, 0.0};
};

/// (|x0> + |x1>)/sqrt(2) on a single register "x".
SparseState superpose_claw(const tcf::Claw& claw);

/// Preimage-type oracle; must return 0 or 1.
using TypeOracle = std::function<int(const BitString&)>;

/// Maps |x> to |x>|r_t . x> with t = type(x), adding a one-bit register "ip".
/// The type ancilla is computed and uncomputed inside the call.
SparseState append_inner_products(const SparseState& state, const BitString& r0,
                                  const BitString& r1, const TypeOracle& type_fn);

struct CollapseResult {
  BitString d;
  QubitState qubit;
};

/// Hadamard transform and measurement of the "x" register of a two-branch
/// state a0|x0>|c0> + a1|x1>|c1>. The outcome d is sampled without
/// materializing 2^n amplitudes; the residual "ip" qubit is returned with its
/// global phase dropped.
CollapseResult hadamard_collapse(const SparseState& state, Rng& rng);

/// Probability of outcome 0 when measuring in {|theta>, |theta + pi/2>},
/// |theta> = cos(theta)|0> + sin(theta)|1>.
double rotated_zero_probability(const QubitState& q, double theta);
int measure_rotated(const QubitState& q, double theta, Rng& rng);

struct RegisterOutcome {
  BitString value;
  SparseState post;
};

/// Computational-basis measurement of one named register.
RegisterOutcome measure_register(const SparseState& state, const std::string& name, Rng& rng);

void validate_state(const Eigen::VectorXcd& psi, double tol = kNormTolerance);
void validate_projector(const Eigen::MatrixXcd& p, double tol = kProjectorTolerance);

struct ProjectiveOutcome {
  int outcome = 0;
  Eigen::VectorXcd post;
};

/// Measures {P, Id - P}; outcome 0 corresponds to P.
ProjectiveOutcome measure_projective(const Eigen::VectorXcd& psi, const Eigen::MatrixXcd& p,
                                     Rng& rng);

}  // namespace qkit::qsim

#endif  // QKIT_QSIM_HPP
