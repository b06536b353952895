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

#include "qkit/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "qkit/errors.hpp"
#include "qkit/qsim.hpp"

namespace qkit::analysis {
namespace {

using Complex = std::complex<double>;

Matrix hermitize(const Matrix& m) { return (m + m.adjoint()) / 2.0; }

// Orthonormal basis of the range of a projector.
Matrix range_basis(const Matrix& p) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(p));
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
    if (es.eigenvalues()(k) > 0.5) keep.push_back(k);
  }
  Matrix basis(p.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) basis.col(c) = es.eigenvectors().col(keep[c]);
  return basis;
}

double cos2(double x) {
  const double c = std::cos(x);
  return c * c;
}

}  // namespace

double fold_angle(double angle) {
  double r = angle - kPi * std::floor((angle + kPi / 2) / kPi);
  if (r >= kPi / 2) r -= kPi;
  if (r < -kPi / 2) r += kPi;
  return r;
}

void validate_inputs(const Matrix& q0, const Matrix& q1, const Vector& psi) {
  const auto d = psi.size();
  if (d == 0 || static_cast<std::size_t>(d) > kMaxDim) {
    throw ValidationError("dimension must be in [1, " + std::to_string(kMaxDim) + "]");
  }
  if (q0.rows() != d || q1.rows() != d) throw ValidationError("projector and state dimensions differ");
  qsim::validate_projector(q0);
  qsim::validate_projector(q1);
  qsim::validate_state(psi);
}

JordanReport jordan_decompose(const Matrix& q0, const Matrix& q1, const Vector& psi) {
  validate_inputs(q0, q1, psi);
  const Eigen::Index d = psi.size();
  JordanReport report;

  const Matrix v0 = range_basis(q0);
  Matrix covered = Matrix::Zero(d, d);
  if (v0.cols() > 0) {
    covered = v0 * v0.adjoint();
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(v0.adjoint() * q1 * v0));
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
      const double lam = std::clamp(es.eigenvalues()(k), 0.0, 1.0);
      const Vector v = v0 * es.eigenvectors().col(k);
      JordanSubspace sub;
      if (lam > 1.0 - kClusterTolerance || lam < kClusterTolerance) {
        sub.dim = 1;
        sub.basis = v;
        sub.in_q0 = true;
        sub.in_q1 = lam > 0.5;
      } else {
        Vector w = q1 * v - lam * v;
        w /= w.norm();
        sub.dim = 2;
        sub.basis.resize(d, 2);
        sub.basis.col(0) = v;
        sub.basis.col(1) = w;
        sub.theta = std::acos(std::sqrt(lam));
        covered += w * w.adjoint();
      }
      report.subspaces.push_back(std::move(sub));
    }
  }
  // What is left lies in ker(Q0) and is invariant under Q1.
  const Matrix rest = range_basis(Matrix::Identity(d, d) - covered);
  if (rest.cols() > 0) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(rest.adjoint() * q1 * rest));
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
      JordanSubspace sub;
      sub.dim = 1;
      sub.basis = rest * es.eigenvectors().col(k);
      sub.in_q0 = false;
      sub.in_q1 = es.eigenvalues()(k) > 0.5;
      report.subspaces.push_back(std::move(sub));
    }
  }

  // One-dimensional subspaces are pooled by their (Q0, Q1) eigenvalues.
  std::map<std::pair<bool, bool>, std::pair<Vector, std::size_t>> pooled;
  for (std::size_t i = 0; i < report.subspaces.size(); ++i) {
    const JordanSubspace& sub = report.subspaces[i];
    if (sub.dim == 1) {
      const Vector v = sub.basis.col(0);
      const Vector part = v * v.dot(psi);
      auto [it, inserted] = pooled.try_emplace({sub.in_q0, sub.in_q1}, part, i);
      if (!inserted) it->second.first += part;
      continue;
    }
    const Vector v = sub.basis.col(0);
    const Vector w = sub.basis.col(1);
    const Complex a = v.dot(psi);
    const Complex b = w.dot(psi);
    const Complex z = a * a + b * b;
    const Complex phase = std::abs(z) > 0 ? std::polar(1.0, std::arg(z) / 2) : Complex(1.0);
    const Complex ar = a / phase;
    const Complex br = b / phase;
    const double parts[2][2] = {{ar.real(), br.real()}, {ar.imag(), br.imag()}};
    for (int part = 0; part < 2; ++part) {
      const double x = parts[part][0];
      const double y = parts[part][1];
      const double t = x * x + y * y;
      if (t < kWeightFloor) continue;
      const double phi = std::atan2(y, x);
      const Complex factor = part == 0 ? phase : phase * Complex(0.0, 1.0);
      JordanBlock block;
      block.weight = t;
      block.alpha = fold_angle(-phi);
      block.beta = fold_angle(sub.theta - phi);
      block.dim = 2;
      block.subspace = i;
      block.basis.resize(d, 2);
      block.basis.col(0) = factor * (x * v + y * w) / std::sqrt(t);
      block.basis.col(1) = factor * (-y * v + x * w) / std::sqrt(t);
      report.blocks.push_back(std::move(block));
    }
  }
  for (const auto& [key, entry] : pooled) {
    const double t = entry.first.squaredNorm();
    if (t < kWeightFloor) continue;
    JordanBlock block;
    block.weight = t;
    block.alpha = fold_angle(key.first ? 0.0 : kPi / 2);
    block.beta = fold_angle(key.second ? 0.0 : kPi / 2);
    block.dim = 1;
    block.subspace = entry.second;
    block.basis = entry.first / std::sqrt(t);
    report.blocks.push_back(std::move(block));
  }

  report.classical_diag = true;
  for (const auto& b : report.blocks) {
    report.p0 += b.weight * cos2(b.alpha);
    report.p1 += b.weight * cos2(b.beta);
    report.p_xor += b.weight * cos2(b.alpha - b.beta);
    if (b.dim == 2) report.classical_diag = false;
  }
  report.delta = std::abs(report.p_xor - 0.5);
  report.quantum_slack = kOmega + report.delta - (report.p0 + report.p1) / 2;
  report.reconstruction_error = std::max((reconstruct(report, 0, d) - q0).norm(),
                                         (reconstruct(report, 1, d) - q1).norm());
  return report;
}

Matrix reconstruct(const JordanReport& report, int m, std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  Matrix out = Matrix::Zero(d, d);
  for (const auto& sub : report.subspaces) {
    if (sub.dim == 1) {
      if (m == 0 ? sub.in_q0 : sub.in_q1) out += sub.basis.col(0) * sub.basis.col(0).adjoint();
      continue;
    }
    const Vector ray = m == 0 ? Vector(sub.basis.col(0))
                              : Vector(std::cos(sub.theta) * sub.basis.col(0) +
                                       std::sin(sub.theta) * sub.basis.col(1));
    out += ray * ray.adjoint();
  }
  return out;
}

double parity_success(const Matrix& q0, const Matrix& q1, const Vector& psi) {
  validate_inputs(q0, q1, psi);
  const Matrix id = Matrix::Identity(psi.size(), psi.size());
  return ((q1 * q0 + (id - q1) * (id - q0)) * psi).squaredNorm();
}

SoundnessCheck soundness_check(const JordanReport& report) {
  SoundnessCheck out;
  const double mean = (report.p0 + report.p1) / 2;
  out.quantum_slack = kOmega + report.delta - mean;
  if (report.classical_diag) out.classical_slack = 0.75 + report.delta / 2 - mean;
  out.tight = out.quantum_slack <= 1e-9;
  return out;
}

AnticommutatorResult anticommutator_expectation(const Matrix& q0, const Matrix& q1,
                                                const Vector& psi) {
  const JordanReport report = jordan_decompose(q0, q1, psi);
  const Matrix id = Matrix::Identity(psi.size(), psi.size());
  const Matrix s0 = 2.0 * q0 - id;
  const Matrix s1 = 2.0 * q1 - id;
  AnticommutatorResult out;
  out.dense = ((s0 * s1 + s1 * s0) * psi).squaredNorm();
  for (const auto& b : report.blocks) out.block_formula += b.weight * 4.0 * cos2(2.0 * (b.alpha - b.beta));
  return out;
}

DeviationMoments deviation_moments(const JordanReport& report) {
  DeviationMoments out;
  const double edge = 3.0 * kPi / 16;
  for (const auto& b : report.blocks) {
    const double a = fold_angle(b.alpha);
    const double c = fold_angle(b.beta);
    const double gap = std::abs(a - c) - kPi / 4;
    out.m1 += b.weight * gap * gap;
    out.m2 += b.weight * (a + c) * (a + c);
    if (a < -edge || a > edge || c < -edge || c > edge) out.offgrid += b.weight;
    const double eta = std::max(std::min(std::abs(a - kPi / 8), std::abs(a + kPi / 8)), std::abs(a + c));
    out.eta_max = std::max(out.eta_max, eta);
  }
  return out;
}

double angle_sum_slack(double alpha, double beta) {
  return std::abs(2.0 * cos2(alpha - beta) - 1.0) + 2.0 * kOmega - cos2(alpha) - cos2(beta);
}

double offgrid_slack(double alpha, double beta) {
  return cos2(alpha - beta) - 0.5 - 100.0 * ((cos2(alpha) + cos2(beta)) / 2 - 0.851);
}

TrigScan trig_scan(std::size_t grid_points) {
  if (grid_points < 1000) throw ValidationError("trig_scan needs at least 1000 points per axis");
  TrigScan out;
  const auto n = static_cast<double>(grid_points);
  out.points = grid_points * grid_points;
  out.min_slack_main = angle_sum_slack(0.0, 0.0);
  for (std::size_t i = 0; i < grid_points; ++i) {
    const double a = 2.0 * kPi * static_cast<double>(i) / n;
    for (std::size_t k = 0; k < grid_points; ++k) {
      const double b = 2.0 * kPi * static_cast<double>(k) / n;
      const double s = angle_sum_slack(a, b);
      if (s < out.min_slack_main) {
        out.min_slack_main = s;
        out.argmin_alpha = a;
        out.argmin_beta = b;
      }
    }
  }
  out.equality_slack = angle_sum_slack(kPi / 8, -kPi / 8);

  // alpha over [-pi/2, -3pi/16] and [3pi/16, pi/2], beta over [-pi/2, pi/2).
  const double lo = 3.0 * kPi / 16;
  const std::size_t half = grid_points / 2;
  out.min_slack_offgrid = offgrid_slack(lo, 0.0);
  for (std::size_t i = 0; i < half; ++i) {
    const double u = lo + (kPi / 2 - lo) * static_cast<double>(i) / static_cast<double>(half - 1);
    for (double a : {u, -u}) {
      for (std::size_t k = 0; k < grid_points; ++k) {
        const double b = -kPi / 2 + kPi * static_cast<double>(k) / n;
        out.min_slack_offgrid = std::min(out.min_slack_offgrid, offgrid_slack(a, b));
      }
    }
  }
  return out;
}

RealBlockDevice block_device(double alpha, double beta) {
  RealBlockDevice dev;
  Vector a(2), b(2);
  a << std::cos(alpha), std::sin(alpha);
  b << std::cos(beta), std::sin(beta);
  dev.q0 = a * a.adjoint();
  dev.q1 = b * b.adjoint();
  dev.psi = Vector::Zero(2);
  dev.psi(0) = 1.0;
  return dev;
}

std::vector<TrendPoint> qubit_trend(const std::vector<double>& epsilons) {
  std::vector<TrendPoint> out;
  for (double eps : epsilons) {
    if (eps <= 0 || eps >= kOmega) throw ValidationError("epsilon must lie in (0, cos^2(pi/8))");
    TrendPoint pt;
    pt.epsilon = eps;
    pt.alpha = std::acos(std::sqrt(kOmega - eps));
    const RealBlockDevice dev = block_device(pt.alpha, -pt.alpha);
    pt.anticommutator = anticommutator_expectation(dev.q0, dev.q1, dev.psi).dense;
    pt.ratio = pt.anticommutator / eps;
    out.push_back(pt);
  }
  return out;
}

namespace {

Matrix gaussian(std::size_t rows, std::size_t cols, Rng& rng) {
  std::normal_distribution<double> normal;
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t k = 0; k < cols; ++k) m(i, k) = Complex(normal(rng), normal(rng));
  }
  return m;
}

}  // namespace

Matrix random_projector(std::size_t dim, std::size_t rank, Rng& rng) {
  if (rank > dim) throw ValidationError("rank exceeds dimension");
  if (rank == 0) return Matrix::Zero(dim, dim);
  const Eigen::HouseholderQR<Matrix> qr(gaussian(dim, rank, rng));
  const Matrix u = qr.householderQ() * Matrix::Identity(dim, rank);
  return u * u.adjoint();
}

Vector random_state(std::size_t dim, Rng& rng) {
  Vector v = gaussian(dim, 1, rng).col(0);
  return v / v.norm();
}

Json report_to_json(const JordanReport& report) {
  Json j;
  j["p0"] = report.p0;
  j["p1"] = report.p1;
  j["p_xor"] = report.p_xor;
  j["delta"] = report.delta;
  j["quantum_slack"] = report.quantum_slack;
  j["classical_diag"] = report.classical_diag;
  j["reconstruction_error"] = report.reconstruction_error;
  j["blocks"] = Json::array();
  for (const auto& b : report.blocks) {
    Json e;
    e["weight"] = b.weight;
    e["alpha"] = b.alpha;
    e["beta"] = b.beta;
    e["dim"] = b.dim;
    j["blocks"].push_back(std::move(e));
  }
  return j;
}

std::string report_to_csv(const JordanReport& report) {
  std::ostringstream out;
  out << "t,alpha,beta\n";
  for (const auto& b : report.blocks) out << fmt::format("{:.17g},{:.17g},{:.17g}\n", b.weight, b.alpha, b.beta);
  return out.str();
}

}  // namespace qkit::analysis
