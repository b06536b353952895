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

#ifndef QKIT_ANALYSIS_HPP
#define QKIT_ANALYSIS_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qkit/json.hpp"
#include "qkit/rng.hpp"

/// Two-projection analysis of a Phase-B device: Jordan blocks, success and
/// parity probabilities, soundness slacks, the anticommutator qubit test and
/// scans of the supporting trigonometric inequalities.
namespace qkit::analysis {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// cos^2(pi/8).
inline constexpr double kOmega = 0.85355339059327373;
inline constexpr double kPi = 3.14159265358979323846;

/// Eigenvalues this close to 0 or 1 are treated as exact.
inline constexpr double kClusterTolerance = 1e-9;
/// Blocks lighter than this are dropped from the report.
inline constexpr double kWeightFloor = 1e-13;
inline constexpr std::size_t kMaxDim = 64;

/// Invariant subspace of both projectors, of dimension 1 or 2.
/// dim 1: basis column v with Q0 v = in_q0 v and Q1 v = in_q1 v.
/// dim 2: columns (v, w) with Q0 = |v><v| and Q1 = |b><b|, b = cos(theta) v + sin(theta) w,
/// theta in (0, pi/2).
struct JordanSubspace {
  int dim = 1;
  Matrix basis;
  bool in_q0 = false;
  bool in_q1 = false;
  double theta = 0.0;
};

/// Weighted block seen by the state. Column 0 of basis is u (normalized
/// projection of the state), column 1 (dim 2 only) is the in-block
/// orthogonal direction. In that basis Q0 and Q1 are the rays at alpha and
/// beta. A complex two-dimensional subspace contributes up to two blocks
/// (real and imaginary part of the state's coefficients).
struct JordanBlock {
  double weight = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  int dim = 1;
  Matrix basis;
  std::size_t subspace = 0;
};

struct JordanReport {
  std::vector<JordanSubspace> subspaces;
  std::vector<JordanBlock> blocks;
  double p0 = 0.0;
  double p1 = 0.0;
  double p_xor = 0.0;
  double delta = 0.0;
  double quantum_slack = 0.0;
  bool classical_diag = false;
  /// max over m of the Frobenius distance between Q_m and its block sum.
  double reconstruction_error = 0.0;
};

/// Throws ValidationError on non-projectors, mismatched sizes, D > 64 or a non-unit state.
void validate_inputs(const Matrix& q0, const Matrix& q1, const Vector& psi);

JordanReport jordan_decompose(const Matrix& q0, const Matrix& q1, const Vector& psi);

/// Rebuilds Q0 (m = 0) or Q1 (m = 1) from the subspaces.
Matrix reconstruct(const JordanReport& report, int m, std::size_t dim);

/// || (Q1 Q0 + (Id - Q1)(Id - Q0)) psi ||^2.
double parity_success(const Matrix& q0, const Matrix& q1, const Vector& psi);

struct SoundnessCheck {
  double quantum_slack = 0.0;
  std::optional<double> classical_slack;
  bool tight = false;
};

SoundnessCheck soundness_check(const JordanReport& report);

struct AnticommutatorResult {
  /// <psi| {S0,S1}^2 |psi> by dense evaluation, S_m = 2 Q_m - Id.
  double dense = 0.0;
  /// sum_i t_i 4 cos^2(2 (alpha_i - beta_i)).
  double block_formula = 0.0;
};

AnticommutatorResult anticommutator_expectation(const Matrix& q0, const Matrix& q1,
                                                const Vector& psi);

/// <psi| (S0 S1 + S1 S0)^2 |psi> for real observables over any exact field.
template <class T>
T anticommutator_square(const std::vector<std::vector<T>>& s0,
                        const std::vector<std::vector<T>>& s1, const std::vector<T>& psi) {
  const std::size_t d = psi.size();
  auto apply = [d](const std::vector<std::vector<T>>& m, const std::vector<T>& v) {
    std::vector<T> out(d, T(0));
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t k = 0; k < d; ++k) out[i] += m[i][k] * v[k];
    }
    return out;
  };
  const std::vector<T> a = apply(s0, apply(s1, psi));
  const std::vector<T> b = apply(s1, apply(s0, psi));
  T total(0);
  for (std::size_t i = 0; i < d; ++i) {
    const T v = a[i] + b[i];
    total += v * v;
  }
  return total;
}

/// Reduces an angle modulo pi into [-pi/2, pi/2).
double fold_angle(double angle);

struct DeviationMoments {
  /// sum t (|alpha - beta| - pi/4)^2
  double m1 = 0.0;
  /// sum t (alpha + beta)^2
  double m2 = 0.0;
  /// weight of blocks with alpha or beta outside [-3pi/16, 3pi/16]
  double offgrid = 0.0;
  /// max over blocks of min over the sign of max(|alpha -+ pi/8|, |alpha + beta|)
  double eta_max = 0.0;
};

DeviationMoments deviation_moments(const JordanReport& report);

/// |2cos^2(a - b) - 1| + 2cos^2(pi/8) - cos^2 a - cos^2 b
double angle_sum_slack(double alpha, double beta);
/// cos^2(a - b) - 1/2 - 100((cos^2 a + cos^2 b)/2 - 0.851)
double offgrid_slack(double alpha, double beta);

struct TrigScan {
  std::size_t points = 0;
  double min_slack_main = 0.0;
  double argmin_alpha = 0.0;
  double argmin_beta = 0.0;
  double min_slack_offgrid = 0.0;
  double equality_slack = 0.0;
};

/// grid_points per axis (so grid_points^2 evaluations per inequality); must
/// be at least 1000.
TrigScan trig_scan(std::size_t grid_points);

struct TrendPoint {
  double epsilon = 0.0;
  double alpha = 0.0;
  double anticommutator = 0.0;
  double ratio = 0.0;
};

/// One-block devices on the beta = -alpha family with success cos^2(pi/8) - epsilon.
std::vector<TrendPoint> qubit_trend(const std::vector<double>& epsilons);

/// Two-dimensional device: state |0>, Q0 = |alpha><alpha|, Q1 = |beta><beta|.
struct RealBlockDevice {
  Matrix q0;
  Matrix q1;
  Vector psi;
};
RealBlockDevice block_device(double alpha, double beta);

/// Haar-like random rank-r projector and random unit vector (complex Gaussian).
Matrix random_projector(std::size_t dim, std::size_t rank, Rng& rng);
Vector random_state(std::size_t dim, Rng& rng);

Json report_to_json(const JordanReport& report);
/// One row per block: t,alpha,beta (with header).
std::string report_to_csv(const JordanReport& report);

}  // namespace qkit::analysis

#endif  // QKIT_ANALYSIS_HPP
