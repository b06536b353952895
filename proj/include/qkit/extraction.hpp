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

#ifndef QKIT_EXTRACTION_HPP
#define QKIT_EXTRACTION_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qkit/bits.hpp"
#include "qkit/json.hpp"
#include "qkit/protocol.hpp"
#include "qkit/rng.hpp"
#include "qkit/stats.hpp"
#include "qkit/tcf.hpp"

/// Quantum Goldreich-Levin extraction over a small dense simulator, and the
/// claw-extraction reductions built on it.
namespace qkit::extraction {

/// Total simulated qubits, including the phase-kickback qubit.
inline constexpr std::size_t kMaxQubits = 16;

enum class GateKind { kH, kX, kZ, kCX, kCCX, kU };

/// qubits lists controls first and the target last.
struct Gate {
  GateKind kind = GateKind::kX;
  std::vector<std::size_t> qubits;
  Eigen::Matrix2cd u = Eigen::Matrix2cd::Identity();
};

using Circuit = std::vector<Gate>;

Gate make_gate(GateKind kind, std::vector<std::size_t> qubits);
/// Throws ValidationError unless u is unitary within 1e-10.
Gate make_unitary(std::size_t qubit, const Eigen::Matrix2cd& u);
Circuit inverse(const Circuit& circuit);

/// Named registers laid out contiguously from qubit 0.
class Layout {
 public:
  void add(const std::string& name, std::size_t width);
  bool has(const std::string& name) const;
  std::size_t offset(const std::string& name) const;
  std::size_t width(const std::string& name) const;
  std::size_t qubit(const std::string& name, std::size_t index) const;
  /// Parses "name:index".
  std::size_t parse_ref(const std::string& ref) const;
  std::string ref(std::size_t qubit) const;
  std::size_t total() const { return total_; }

 private:
  struct Entry {
    std::string name;
    std::size_t offset;
    std::size_t width;
  };
  const Entry& find(const std::string& name) const;
  std::vector<Entry> entries_;
  std::size_t total_ = 0;
};

/// {"gate": "CX", "qubits": ["r:0", "b:0"]}; "U" carries "matrix": [[[re,im],..],..].
Gate gate_from_json(const Json& j, const Layout& layout);
Json gate_to_json(const Gate& gate, const Layout& layout);
Circuit circuit_from_json(const Json& j, const Layout& layout);
Json circuit_to_json(const Circuit& circuit, const Layout& layout);

/// Dense state vector; qubit k is bit k of the basis index.
class DenseState {
 public:
  explicit DenseState(std::size_t n_qubits);
  static DenseState from_amplitudes(Eigen::VectorXcd amplitudes);

  std::size_t qubits() const { return n_qubits_; }
  const Eigen::VectorXcd& amplitudes() const { return amps_; }

  void apply(const Gate& gate);
  void apply(const Circuit& circuit);

  /// Distribution of the integer value held by the listed qubits (first = low bit).
  std::vector<double> distribution(const std::vector<std::size_t>& qubits) const;
  /// Projects the listed qubits onto value and renormalizes; returns its probability.
  double collapse(const std::vector<std::size_t>& qubits, std::uint64_t value);
  std::uint64_t measure(const std::vector<std::size_t>& qubits, Rng& rng);

 private:
  std::size_t n_qubits_;
  Eigen::VectorXcd amps_;
};

/// Unitary access to a predictor of a.x. Qubits: x = [0, n), aux = [n, n+m),
/// out = [n+m, n+m+t); the prediction is out qubit `answer`.
struct InnerProductQuery {
  std::size_t n = 0;
  std::size_t aux_qubits = 0;
  std::size_t out_qubits = 1;
  std::size_t answer = 0;
  Eigen::VectorXcd aux_init = Eigen::VectorXcd::Ones(1);
  Circuit apply;

  std::size_t total_qubits() const { return n + aux_qubits + out_qubits; }
  std::vector<std::size_t> x_qubits() const;
  std::size_t answer_qubit() const { return n + aux_qubits + answer; }
  /// Throws CapacityError beyond kMaxQubits (with the kickback qubit) and
  /// ValidationError on malformed fields.
  void validate() const;
};

/// The x register is returned unchanged for every basis input x.
bool check_restitution(const InnerProductQuery& q);

/// Pr_x(w = a.x) - 1/2 for uniform x, evaluated exactly.
double predictor_bias(const InnerProductQuery& q, const BitString& a);

/// Goldreich-Levin circuit: |+>^n, U, phase kickback on the answer through a
/// |-> qubit, U^dagger, H^n, measure x. The outcome distribution is computed
/// once and reused for every sample.
class GlExtractor {
 public:
  explicit GlExtractor(InnerProductQuery q);

  const InnerProductQuery& query() const { return query_; }
  const std::vector<double>& distribution() const { return dist_; }
  double success_probability(const BitString& a) const;
  BitString sample(Rng& rng) const;

  /// Gates in one run, counting the kickback CX and state preparation.
  std::size_t gate_count() const;

 private:
  InnerProductQuery query_;
  std::vector<double> dist_;
};

BitString gl_extract(const InnerProductQuery& q, Rng& rng);

// Reference predictors over a single output qubit.

/// w = a.x exactly (epsilon = 1/2).
InnerProductQuery perfect_predictor(const BitString& a);
/// w = a.x XOR (x_0 AND x_1): epsilon = 1/4 and extraction succeeds with
/// probability exactly 1/4. Needs n >= 2.
InnerProductQuery and_predictor(const BitString& a);
/// One aux qubit prepared with weight `weight` on |1>. On |1> the answer is
/// a.x, on |0> it is a.x XOR x_0: epsilon = weight/2, extraction succeeds with
/// probability weight.
InnerProductQuery mixed_predictor(const BitString& a, double weight);

/// Parity adversary in explicit circuit form. Registers, in order:
/// r (2n bits for simplified, n for kcvy), work (work_qubits), d (n), b (1).
/// round2 computes d from r and work; guess writes the parity guess into b.
/// For kcvy, `preimage` acts on the untouched adversary state and
/// `preimage_output` lists the qubits holding the claimed preimage.
struct Adversary {
  protocol::ProtocolId protocol = protocol::ProtocolId::kSimplified;
  tcf::TcfKey key;
  BitString y;
  std::size_t work_qubits = 0;
  Eigen::VectorXcd work_init = Eigen::VectorXcd::Ones(1);
  Circuit round2;
  Circuit guess;
  Circuit preimage;
  std::vector<std::size_t> preimage_output;

  std::size_t n() const { return key.domain_bits; }
  std::size_t r_bits() const;
  Layout layout() const;
  void validate() const;
};

Adversary adversary_from_json(const Json& j);
Json adversary_to_json(const Adversary& adv);

/// Adversary built with the trapdoor. The parity guess is right with
/// probability (1 + weight)/2; for kcvy the work register holds x0 except
/// with probability kappa, where it holds a non-preimage.
Adversary trapdoor_adversary(protocol::ProtocolId id, const tcf::TcfKey& key,
                             const tcf::Claw& claw, double weight, double kappa = 0.0);

/// Query with x = r, aux = work, out = (d, b), answer = b.
InnerProductQuery parity_query(const Adversary& adv);

struct ExtractionOutcome {
  BitString candidate;
  bool verified = false;
  std::size_t trials = 1;
  std::optional<tcf::Claw> claw;
};

/// Parity-adversary reduction for the simplified protocol: GL over r = r0||r1,
/// candidate split as x0 || x1 and checked against the key.
class SimplifiedExtractor {
 public:
  explicit SimplifiedExtractor(const Adversary& adv);
  ExtractionOutcome run(Rng& rng) const;
  const GlExtractor& gl() const { return gl_; }

 private:
  Adversary adv_;
  GlExtractor gl_;
};

/// KCVY reduction: GL over r recovers s = x0 ^ x1, then the preimage piece runs
/// on the post-measurement state; the claw is (x, x ^ s).
class KcvyExtractor {
 public:
  explicit KcvyExtractor(const Adversary& adv);
  ExtractionOutcome run(Rng& rng) const;

 private:
  struct Branch {
    std::vector<double> preimage_dist;
  };
  Adversary adv_;
  std::vector<double> s_dist_;
  std::vector<Branch> branches_;
};

ExtractionOutcome claw_from_simplified(const Adversary& adv, Rng& rng);
ExtractionOutcome claw_from_kcvy(const Adversary& adv, Rng& rng);

/// Parity-guess advantage: Pr(b = r.(target)) - 1/2 over uniform r, where
/// target is x0||x1 (simplified) or x0^x1 (kcvy).
struct AdvantageEstimate {
  std::uint64_t samples = 0;
  std::uint64_t correct = 0;
  double delta = 0.0;
  Interval delta_interval;
};

AdvantageEstimate estimate_parity_advantage(const Adversary& adv, const tcf::Claw& claw,
                                            std::uint64_t samples, Rng& rng);

/// Probability kappa that the preimage piece fails, estimated by sampling.
struct PreimageEstimate {
  std::uint64_t samples = 0;
  std::uint64_t failures = 0;
  double kappa = 0.0;
  Interval kappa_interval;
};

PreimageEstimate estimate_preimage_failure(const Adversary& adv, std::uint64_t samples,
                                           Rng& rng);

struct ExtractionReport {
  std::uint64_t trials = 0;
  std::uint64_t verified = 0;
  double frequency = 0.0;
  Interval interval;
  AdvantageEstimate advantage;
  std::optional<PreimageEstimate> preimage;
  /// 4 delta^2 (simplified) or 1 - kappa - sqrt(1 - 4 delta^2) (kcvy), from the estimates.
  double bound = 0.0;
};

/// Repeats the matching reduction `trials` times. The claw is used only to
/// measure delta and kappa, never by the extractor itself.
ExtractionReport run_claw_extraction(const Adversary& adv, const tcf::Claw& claw,
                                     std::uint64_t trials, std::uint64_t estimate_samples,
                                     Rng& rng);

Json extraction_report_to_json(const ExtractionReport& report);

}  // namespace qkit::extraction

#endif  // QKIT_EXTRACTION_HPP
