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

#include "qkit/extraction.hpp"

#include <cmath>
#include <complex>

#include <gtest/gtest.h>

#include "qkit/errors.hpp"

namespace qkit::extraction {
namespace {

using protocol::ProtocolId;

struct ToyInstance {
  tcf::KeyPair keys;
  tcf::Claw claw;
};

ToyInstance toy_instance(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  ToyInstance inst{tcf::gen(n, tcf::Family::kToy, rng), {}};
  const BitString x = tcf::sample_domain(inst.keys.key, rng);
  inst.claw = tcf::invert(inst.keys.trapdoor, inst.keys.key, tcf::eval(inst.keys.key, x));
  return inst;
}

// Classical evaluation of an X/CX/CCX circuit on a basis state.
std::uint64_t classical_run(const Circuit& c, std::uint64_t v) {
  for (const Gate& g : c) {
    bool fire = true;
    for (std::size_t i = 0; i + 1 < g.qubits.size(); ++i) fire = fire && ((v >> g.qubits[i]) & 1);
    if (fire) v ^= 1ULL << g.qubits.back();
  }
  return v;
}

TEST(DenseState, GatesActAsExpected) {
  DenseState s(3);
  s.apply(make_gate(GateKind::kX, {0}));
  s.apply(make_gate(GateKind::kCX, {0, 2}));
  s.apply(make_gate(GateKind::kCCX, {0, 2, 1}));
  EXPECT_NEAR(std::abs(s.amplitudes()(7)), 1.0, 1e-15);

  DenseState h(1);
  h.apply(make_gate(GateKind::kH, {0}));
  h.apply(make_gate(GateKind::kZ, {0}));
  h.apply(make_gate(GateKind::kH, {0}));
  EXPECT_NEAR(std::abs(h.amplitudes()(1)), 1.0, 1e-15);
}

TEST(DenseState, CollapseRenormalizes) {
  DenseState s(2);
  s.apply(make_gate(GateKind::kH, {0}));
  s.apply(make_gate(GateKind::kCX, {0, 1}));
  const auto dist = s.distribution({1});
  EXPECT_NEAR(dist[0], 0.5, 1e-15);
  EXPECT_NEAR(s.collapse({1}, 1), 0.5, 1e-15);
  EXPECT_NEAR(std::abs(s.amplitudes()(3)), 1.0, 1e-15);
}

TEST(Gate, RejectsNonUnitaryAndBadArity) {
  Eigen::Matrix2cd m;
  m << 1, 1, 0, 1;
  EXPECT_THROW(make_unitary(0, m), ValidationError);
  EXPECT_THROW(make_gate(GateKind::kCX, {0}), ValidationError);
  const std::complex<double> i(0, 1);
  m << 0, -i, i, 0;
  const Gate y = make_unitary(0, m);
  const Circuit inv = inverse({y});
  EXPECT_LT((inv[0].u - m.adjoint()).norm(), 1e-15);
}

TEST(Layout, RefsRoundTrip) {
  Layout l;
  l.add("r", 4);
  l.add("b", 1);
  EXPECT_EQ(l.parse_ref("b:0"), 4u);
  EXPECT_EQ(l.ref(2), "r:2");
  EXPECT_THROW(l.parse_ref("r:4"), ValidationError);
  EXPECT_THROW(l.parse_ref("q:0"), ValidationError);
  EXPECT_THROW(l.parse_ref("r"), ValidationError);
}

TEST(GoldreichLevin, PerfectPredictorIsDeterministic) {
  const BitString a = BitString::from_uint(0b101, 3);
  const GlExtractor gl(perfect_predictor(a));
  EXPECT_NEAR(gl.success_probability(a), 1.0, 1e-12);
  EXPECT_NEAR(predictor_bias(gl.query(), a), 0.5, 1e-12);
  Rng rng(7);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(gl.sample(rng), a);
}

TEST(GoldreichLevin, AndPredictorHitsBoundExactly) {
  const BitString a = BitString::from_uint(0b1011, 4);
  const InnerProductQuery q = and_predictor(a);
  EXPECT_NEAR(predictor_bias(q, a), 0.25, 1e-12);
  EXPECT_NEAR(GlExtractor(q).success_probability(a), 0.25, 1e-12);
}

TEST(GoldreichLevin, MixedPredictorMatchesClosedForm) {
  const BitString a = BitString::from_uint(0b0110, 4);
  for (double w : {0.0, 0.2, 0.5, 0.8, 1.0}) {
    const InnerProductQuery q = mixed_predictor(a, w);
    const double eps = predictor_bias(q, a);
    EXPECT_NEAR(eps, w / 2, 1e-12);
    const double p = GlExtractor(q).success_probability(a);
    EXPECT_NEAR(p, w, 1e-12);
    EXPECT_GE(p + 1e-12, 4 * eps * eps);
  }
}

// For a deterministic classical predictor f, the GL output distribution is the
// squared Walsh-Hadamard spectrum of (-1)^f.
TEST(GoldreichLevin, MatchesWalshSpectrumOnRandomCircuits) {
  Rng rng(99);
  const std::size_t n = 4;
  for (int trial = 0; trial < 40; ++trial) {
    InnerProductQuery q;
    q.n = n;
    q.out_qubits = 2;
    q.answer = 1;
    const std::size_t o0 = n;
    const std::size_t o1 = n + 1;
    for (int g = 0; g < 8; ++g) {
      const std::size_t c0 = rng.below(n);
      const std::size_t c1 = (c0 + 1 + rng.below(n - 1)) % n;
      const std::size_t t = rng.bit() ? o0 : o1;
      switch (rng.below(3)) {
        case 0:
          q.apply.push_back(make_gate(GateKind::kCX, {c0, t}));
          break;
        case 1:
          q.apply.push_back(make_gate(GateKind::kCCX, {c0, c1, t}));
          break;
        default:
          q.apply.push_back(make_gate(GateKind::kCCX, {c0, o0, o1}));
      }
    }
    ASSERT_TRUE(check_restitution(q));
    const GlExtractor gl(q);
    for (std::uint64_t z = 0; z < 16; ++z) {
      double sum = 0.0;
      for (std::uint64_t x = 0; x < 16; ++x) {
        const int f = static_cast<int>((classical_run(q.apply, x) >> o1) & 1);
        const int zx = __builtin_popcountll(z & x) & 1;
        sum += ((f ^ zx) ? -1.0 : 1.0);
      }
      EXPECT_NEAR(gl.distribution()[z], (sum / 16) * (sum / 16), 1e-12);
    }
  }
}

TEST(GoldreichLevin, FrequencyClearsBoundAcrossEpsilonGrid) {
  const BitString a = BitString::from_uint(0b1101, 4);
  Rng rng(2024);
  for (double eps : {0.1, 0.25, 0.4, 0.5}) {
    const GlExtractor gl(mixed_predictor(a, 2 * eps));
    const int runs = 4000;
    int hits = 0;
    for (int i = 0; i < runs; ++i) hits += gl.sample(rng) == a;
    const double freq = static_cast<double>(hits) / runs;
    const double bound = 4 * eps * eps;
    const double sigma = std::sqrt(bound * (1 - bound) / runs);
    EXPECT_GE(freq, bound - 5 * sigma) << "eps=" << eps;
  }
}

TEST(GoldreichLevin, RestitutionViolationIsDetected) {
  InnerProductQuery q = perfect_predictor(BitString::from_uint(1, 2));
  q.apply.push_back(make_gate(GateKind::kH, {0}));
  EXPECT_FALSE(check_restitution(q));
  // Touching x but undoing it is fine.
  InnerProductQuery ok = perfect_predictor(BitString::from_uint(1, 2));
  ok.apply.push_back(make_gate(GateKind::kX, {1}));
  ok.apply.push_back(make_gate(GateKind::kX, {1}));
  EXPECT_TRUE(check_restitution(ok));
}

TEST(GoldreichLevin, CapacityAndValidation) {
  EXPECT_THROW(perfect_predictor(BitString(15)).validate(), CapacityError);
  InnerProductQuery q = perfect_predictor(BitString::from_uint(1, 2));
  q.answer = 1;
  EXPECT_THROW(q.validate(), ValidationError);
  q.answer = 0;
  q.apply.push_back(make_gate(GateKind::kX, {7}));
  EXPECT_THROW(q.validate(), ValidationError);
}

TEST(ClawExtraction, SimplifiedIdealAdversary) {
  const ToyInstance inst = toy_instance(4, 11);
  const Adversary adv = trapdoor_adversary(ProtocolId::kSimplified, inst.keys.key, inst.claw, 1.0);
  Rng rng(3);
  const ExtractionReport rep = run_claw_extraction(adv, inst.claw, 1000, 20000, rng);
  EXPECT_NEAR(rep.advantage.delta, 0.5, 1e-12);
  EXPECT_GE(rep.frequency, 0.99);
}

TEST(ClawExtraction, SimplifiedPartialAdvantage) {
  const ToyInstance inst = toy_instance(3, 12);
  // delta = 0.2
  const Adversary adv = trapdoor_adversary(ProtocolId::kSimplified, inst.keys.key, inst.claw, 0.4);
  Rng rng(4);
  const ExtractionReport rep = run_claw_extraction(adv, inst.claw, 10000, 40000, rng);
  EXPECT_TRUE(rep.advantage.delta_interval.contains(0.2));
  EXPECT_GE(rep.frequency, 4 * 0.2 * 0.2 * 0.9);
  const SimplifiedExtractor ex(adv);
  for (int i = 0; i < 500; ++i) {
    const ExtractionOutcome out = ex.run(rng);
    if (!out.verified) continue;
    ASSERT_TRUE(out.claw);
    EXPECT_NE(out.claw->x0, out.claw->x1);
    EXPECT_EQ(tcf::eval(inst.keys.key, out.claw->x0), tcf::eval(inst.keys.key, out.claw->x1));
  }
}

TEST(ClawExtraction, RandomGuesserOutputsStayVerified) {
  const ToyInstance inst = toy_instance(3, 13);
  const Adversary adv = trapdoor_adversary(ProtocolId::kSimplified, inst.keys.key, inst.claw, 0.0);
  Rng rng(5);
  const SimplifiedExtractor ex(adv);
  for (int i = 0; i < 300; ++i) {
    const ExtractionOutcome out = ex.run(rng);
    if (out.verified) {
      EXPECT_TRUE(tcf::is_valid_claw(inst.keys.key, out.claw->x0, out.claw->x1));
    }
  }
}

TEST(ClawExtraction, KcvyIdealAndNoisy) {
  const ToyInstance inst = toy_instance(4, 14);
  Rng rng(6);
  const Adversary ideal = trapdoor_adversary(ProtocolId::kKcvy, inst.keys.key, inst.claw, 1.0, 0.0);
  const ExtractionReport r1 = run_claw_extraction(ideal, inst.claw, 1000, 10000, rng);
  EXPECT_GE(r1.frequency, 0.95);
  ASSERT_TRUE(r1.preimage);
  EXPECT_EQ(r1.preimage->failures, 0u);

  // delta = 0.3, kappa = 0.05
  const Adversary noisy = trapdoor_adversary(ProtocolId::kKcvy, inst.keys.key, inst.claw, 0.6, 0.05);
  const ExtractionReport r2 = run_claw_extraction(noisy, inst.claw, 5000, 40000, rng);
  EXPECT_GE(r2.frequency, 1 - 0.05 - std::sqrt(1 - 0.36) - 0.05);
  EXPECT_GE(r2.frequency, r2.bound - 0.05);
  EXPECT_TRUE(r2.preimage->kappa_interval.contains(0.05));
}

TEST(ClawExtraction, KcvyAlwaysFailingPreimage) {
  const ToyInstance inst = toy_instance(3, 15);
  const Adversary adv = trapdoor_adversary(ProtocolId::kKcvy, inst.keys.key, inst.claw, 1.0, 1.0);
  Rng rng(8);
  const KcvyExtractor ex(adv);
  // The toy family pairs every x with x ^ s, so a wrong preimage can still
  // complete a claw, just not one over y. Verification is all that is promised.
  for (int i = 0; i < 200; ++i) {
    const ExtractionOutcome out = ex.run(rng);
    if (!out.verified) continue;
    EXPECT_TRUE(tcf::is_valid_claw(inst.keys.key, out.claw->x0, out.claw->x1));
    EXPECT_NE(out.claw->y, adv.y);
  }
}

TEST(ClawExtraction, AdversaryJsonRoundTrip) {
  const ToyInstance inst = toy_instance(3, 16);
  const Adversary adv = trapdoor_adversary(ProtocolId::kKcvy, inst.keys.key, inst.claw, 0.7, 0.1);
  const Json j = adversary_to_json(adv);
  const Adversary back = adversary_from_json(j);
  EXPECT_EQ(adversary_to_json(back), j);
  EXPECT_EQ(back.preimage_output, adv.preimage_output);

  Json missing = j;
  missing.erase("guess");
  EXPECT_THROW(adversary_from_json(missing), ValidationError);
  Json klvy = j;
  klvy["protocol"] = "klvy_chsh";
  EXPECT_THROW(adversary_from_json(klvy), ValidationError);
  Json bad = j;
  bad["guess"].push_back(Json{{"gate", "U"}, {"qubits", {"b:0"}},
                              {"matrix", {{{1, 0}, {1, 0}}, {{0, 0}, {1, 0}}}}});
  EXPECT_THROW(adversary_from_json(bad), ValidationError);
}

TEST(ClawExtraction, NonRestitutiveAdversaryRejected) {
  const ToyInstance inst = toy_instance(3, 17);
  Adversary adv = trapdoor_adversary(ProtocolId::kSimplified, inst.keys.key, inst.claw, 1.0);
  adv.guess.push_back(make_gate(GateKind::kH, {0}));
  EXPECT_THROW(SimplifiedExtractor{adv}, ValidationError);
}

TEST(ClawExtraction, OversizedAdversaryRejected) {
  const ToyInstance inst = toy_instance(5, 18);
  EXPECT_THROW(trapdoor_adversary(ProtocolId::kSimplified, inst.keys.key, inst.claw, 1.0),
               CapacityError);
}

}  // namespace
}  // namespace qkit::extraction
