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

#include "qkit/protocols.hpp"

#include <cmath>
#include <functional>
#include <numbers>

#include <gtest/gtest.h>

#include "qkit/errors.hpp"
#include "qkit/provers.hpp"
#include "qkit/qsim.hpp"

namespace qkit::protocol {
namespace {

const double kOmega = std::pow(std::cos(std::numbers::pi / 8), 2);

// Prover driven by a callback; verdicts get no reply.
class ScriptedProver final : public Prover {
 public:
  using Fn = std::function<std::optional<Message>(const Message&, Rng&)>;
  ScriptedProver(ProtocolId id, Fn fn) : id_(id), fn_(std::move(fn)) {}
  ProtocolId protocol() const override { return id_; }
  std::optional<Message> respond(const Message& msg, Rng& rng) override {
    if (message_type(msg) == "verdict") return std::nullopt;
    return fn_(msg, rng);
  }

 private:
  ProtocolId id_;
  Fn fn_;
};

ExecutionResult run_once(ProtocolId id, Prover& prover, std::uint64_t seed,
                         VerifierConfig cfg = {}) {
  auto v = make_verifier(id, cfg);
  Rng vr = Rng::stream(seed, 0, Rng::Lane::kVerifier);
  Rng pr = Rng::stream(seed, 0, Rng::Lane::kProver);
  return run_protocol_recorded(*v, prover, vr, pr);
}

BitString bits(std::uint64_t v, std::size_t n) { return BitString::from_uint(v, n); }

TEST(Decide, SignRule) {
  EXPECT_TRUE(decide(1, 0));
  EXPECT_TRUE(decide(-1, 1));
  EXPECT_FALSE(decide(1, 1));
  EXPECT_FALSE(decide(-1, 0));
  EXPECT_THROW(decide(0, 0), ValidationError);
  EXPECT_THROW(decide(1, 2), ValidationError);
}

TEST(Messages, ResponseParsingAndNames) {
  EXPECT_EQ(parse_response(response_message(1)), 1);
  EXPECT_THROW(parse_response(Json{{"type", "response"}, {"b", 3}}), ProtocolViolation);
  EXPECT_THROW(parse_response(Json{{"type", "d"}}), ProtocolViolation);
  for (auto id : {ProtocolId::kKcvy, ProtocolId::kSimplified, ProtocolId::kKlvyChsh}) {
    EXPECT_EQ(protocol_from_string(to_string(id)), id);
  }
  for (auto f : {Flag::kAcc, Flag::kRej, Flag::kCont}) EXPECT_EQ(flag_from_string(to_string(f)), f);
  EXPECT_THROW(protocol_from_string("bb84"), ValidationError);
}

// Hand-written truth table: x0 = 01, x1 = 11 (s = 10).
TEST(CHat, SimplifiedTruthTable) {
  const BitString x0 = bits(0b01, 2), x1 = bits(0b11, 2);
  struct Row {
    unsigned r0, r1, d;
    int c0, c1;
  };
  // alpha = r0.x0 ^ r1.x1; alpha = 0 -> (-1)^{r0.x0}; alpha = 1 -> (-1)^{d.s + m}.
  const Row rows[] = {
      {0b00, 0b00, 0b00, 1, 1},    // alpha 0, r0.x0 = 0
      {0b01, 0b01, 0b11, -1, -1},  // alpha 0, r0.x0 = 1
      {0b01, 0b00, 0b00, 1, -1},   // alpha 1, d.s = 0
      {0b01, 0b00, 0b10, -1, 1},   // alpha 1, d.s = 1
      {0b00, 0b10, 0b11, -1, 1},   // alpha 1, d.s = 1
  };
  for (const Row& r : rows) {
    for (int m : {0, 1}) {
      EXPECT_EQ(simplified_c_hat(bits(r.r0, 2), bits(r.r1, 2), x0, x1, bits(r.d, 2), m),
                m == 0 ? r.c0 : r.c1)
          << r.r0 << " " << r.r1 << " " << r.d << " m=" << m;
    }
  }
  EXPECT_THROW(simplified_c_hat(x0, x0, x0, x0, x0, 0), ValidationError);
}

TEST(CHat, KcvyAndKlvyTruthTables) {
  const BitString x0 = bits(0b01, 2), x1 = bits(0b11, 2);
  EXPECT_EQ(kcvy_c_hat(bits(0b01, 2), x0, x1, bits(0b10, 2), 0), -1);  // r.s = 0, r.x0 = 1
  EXPECT_EQ(kcvy_c_hat(bits(0b00, 2), x0, x1, bits(0b10, 2), 1), 1);   // r.s = 0, r.x0 = 0
  EXPECT_EQ(kcvy_c_hat(bits(0b10, 2), x0, x1, bits(0b10, 2), 0), -1);  // r.s = 1, d.s = 1
  EXPECT_EQ(kcvy_c_hat(bits(0b10, 2), x0, x1, bits(0b01, 2), 1), -1);  // r.s = 1, d.s = 0, m = 1
  // CHSH: c_hat_m = (-1)^{a + x m}.
  const int table[2][2][2] = {{{1, 1}, {-1, -1}}, {{1, -1}, {-1, 1}}};
  for (int x : {0, 1}) {
    for (int a : {0, 1}) {
      for (int m : {0, 1}) EXPECT_EQ(klvy_c_hat(x, a, m), table[x][a][m]);
    }
  }
  EXPECT_THROW(klvy_c_hat(2, 0, 0), ValidationError);
}

// Born-rule oracle: for every (r0, r1, d) reachable by the honest state, the
// answer matching c_hat_m has probability cos^2(pi/8) at the honest angle.
TEST(CHat, MatchesHonestResidualQubit) {
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const tcf::KeyPair kp = tcf::gen(4, tcf::Family::kToy, rng);
    const tcf::Claw c = tcf::invert(kp.trapdoor, kp.key, tcf::eval(kp.key, tcf::sample_domain(kp.key, rng)));
    const BitString r0 = random_bitstring(4, rng);
    const BitString r1 = trial % 2 ? r0 : random_bitstring(4, rng);
    auto type = [&](const BitString& x) { return tcf::preimage_type(kp.key, x); };
    const qsim::CollapseResult col =
        qsim::hadamard_collapse(qsim::append_inner_products(qsim::superpose_claw(c), r0, r1, type), rng);
    for (int m : {0, 1}) {
      const int ch = trial % 2 ? kcvy_c_hat(r0, c.x0, c.x1, col.d, m)
                               : simplified_c_hat(r0, r1, c.x0, c.x1, col.d, m);
      const double p0 = qsim::rotated_zero_probability(
          col.qubit, m == 0 ? provers::kThetaChallenge0 : provers::kThetaChallenge1);
      EXPECT_NEAR(ch == 1 ? p0 : 1 - p0, kOmega, 1e-9) << "trial " << trial << " m=" << m;
    }
  }
}

TEST(Run, HonestSimplifiedTranscriptShape) {
  auto prover = provers::make_prover(ProtocolId::kSimplified, provers::ProverKind::kHonestQuantum);
  const ExecutionResult r = run_once(ProtocolId::kSimplified, *prover, 1);
  ASSERT_EQ(r.flag, Flag::kCont);
  ASSERT_TRUE(r.phase_b);
  const char* order[] = {"key", "y", "r", "d", "challenge", "response", "verdict"};
  ASSERT_EQ(r.transcript.messages.size(), 7u);
  for (std::size_t i = 0; i < 7; ++i) EXPECT_EQ(message_type(r.transcript.messages[i].body), order[i]);
  EXPECT_EQ(r.transcript.messages[0].direction, Direction::kToProver);
  EXPECT_EQ(r.transcript.messages[1].direction, Direction::kToVerifier);
  EXPECT_EQ(r.transcript.messages[4].body["m"], r.phase_b->m);
  EXPECT_EQ(r.accepted(), decide(r.phase_b->c_hat(), r.phase_b->b));
}

TEST(Run, RecomputedCHatsMatchVerifier) {
  for (auto id : {ProtocolId::kSimplified, ProtocolId::kKcvy, ProtocolId::kKlvyChsh}) {
    int checked = 0;
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
      auto prover = provers::make_prover(id, provers::ProverKind::kHonestQuantum);
      const ExecutionResult r = run_once(id, *prover, seed);
      if (r.flag != Flag::kCont) continue;
      const auto [c0, c1] =
          recompute_c_hats(id, r.transcript.verifier_rand, r.transcript.messages_json());
      EXPECT_EQ(c0, r.phase_b->c_hat0);
      EXPECT_EQ(c1, r.phase_b->c_hat1);
      ++checked;
    }
    EXPECT_GT(checked, 10) << to_string(id);
  }
}

TEST(Run, SecretsStayOutOfMessages) {
  for (auto id : {ProtocolId::kSimplified, ProtocolId::kKcvy, ProtocolId::kKlvyChsh}) {
    auto prover = provers::make_prover(id, provers::ProverKind::kHonestQuantum);
    const ExecutionResult r = run_once(id, *prover, 5);
    const std::string sentinel = r.transcript.verifier_rand["sentinel"];
    EXPECT_EQ(sentinel.size(), 32u);
    EXPECT_EQ(r.transcript.messages_json().dump().find(sentinel), std::string::npos);
    EXPECT_EQ(r.transcript.messages_json().dump().find("trapdoor"), std::string::npos);
  }
}

TEST(Kcvy, PreimageBranchChecksTheClaw) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    std::optional<tcf::TcfKey> key;
    BitString x;
    bool lie = seed % 2;
    ScriptedProver p(ProtocolId::kKcvy, [&](const Message& msg, Rng& rng) -> std::optional<Message> {
      const std::string t = message_type(msg);
      if (t == "key") {
        key = parse_key_message(msg);
        x = tcf::sample_domain(*key, rng);
        return y_message(tcf::eval(*key, x));
      }
      if (t == "branch" && msg["value"] == "preimage") {
        // A flipped bit 0 may or may not land on the partner; both outcomes are checked.
        BitString sent = x;
        if (lie) sent.set(0, !sent.get(0));
        return preimage_message(sent);
      }
      if (t == "branch") return d_message(BitString(key->domain_bits));
      return response_message(0);
    });
    const ExecutionResult r = run_once(ProtocolId::kKcvy, p, seed);
    if (r.annotations["branch"] != "preimage") continue;
    const tcf::Claw c = tcf::invert(
        tcf::trapdoor_from_json(*key, r.transcript.verifier_rand["trapdoor"]), *key,
        tcf::eval(*key, x));
    BitString sent = x;
    if (lie) sent.set(0, !sent.get(0));
    EXPECT_EQ(r.flag, (sent == c.x0 || sent == c.x1) ? Flag::kAcc : Flag::kRej);
    EXPECT_FALSE(r.phase_b);
  }
}

TEST(Violations, WrongMessageTypeIsRecorded) {
  ScriptedProver p(ProtocolId::kSimplified, [](const Message&, Rng&) -> std::optional<Message> {
    return Json{{"type", "d"}};
  });
  const ExecutionResult r = run_once(ProtocolId::kSimplified, p, 2);
  EXPECT_EQ(r.flag, Flag::kRej);
  ASSERT_TRUE(r.violation);
  EXPECT_NE(r.violation->find("expected 'y'"), std::string::npos);
  EXPECT_FALSE(r.accepted());

  auto v = make_verifier(ProtocolId::kSimplified, {});
  Rng vr(1), pr(2);
  EXPECT_THROW(run_protocol(*v, p, vr, pr), ProtocolViolation);
}

TEST(Violations, WrongWidthAndMissingReply) {
  ScriptedProver wide(ProtocolId::kSimplified, [](const Message&, Rng&) -> std::optional<Message> {
    return y_message(BitString(17));
  });
  EXPECT_TRUE(run_once(ProtocolId::kSimplified, wide, 3).violation);
  ScriptedProver mute(ProtocolId::kKlvyChsh, [](const Message&, Rng&) -> std::optional<Message> {
    return std::nullopt;
  });
  const ExecutionResult r = run_once(ProtocolId::kKlvyChsh, mute, 3);
  ASSERT_TRUE(r.violation);
  EXPECT_EQ(r.flag, Flag::kRej);
}

TEST(Violations, MismatchedProtocolsAreConfigurationErrors) {
  auto prover = provers::make_prover(ProtocolId::kKcvy, provers::ProverKind::kHonestQuantum);
  auto v = make_verifier(ProtocolId::kSimplified, {});
  Rng vr(1), pr(2);
  EXPECT_THROW(run_protocol(*v, *prover, vr, pr), ValidationError);
}

// N = 21: squares mod 21 among units are {1, 4, 16}; 5 is not one.
TEST(Simplified, RabinImageCheck) {
  ScriptedProver p(ProtocolId::kSimplified, [](const Message& msg, Rng&) -> std::optional<Message> {
    const tcf::TcfKey key = parse_key_message(msg);
    return y_message(tcf::from_bigint(tcf::BigInt(5), key.range_bits));
  });
  VerifierConfig cfg;
  cfg.family = tcf::Family::kRabin;
  cfg.n_bits = 2;
  const ExecutionResult r = run_once(ProtocolId::kSimplified, p, 4, cfg);
  EXPECT_EQ(r.flag, Flag::kRej);
  EXPECT_EQ(r.annotations["reject_reason"], "y outside image");
  EXPECT_FALSE(r.violation);
}

TEST(Klvy, ForeignCiphertextIsRejected) {
  Rng other(99);
  qhe::SecretKey sk = qhe::SecretKey::generate(other);
  ScriptedProver p(ProtocolId::kKlvyChsh, [&](const Message&, Rng& rng) -> std::optional<Message> {
    return sk.enc(0, rng).to_wire();
  });
  const ExecutionResult r = run_once(ProtocolId::kKlvyChsh, p, 6);
  EXPECT_EQ(r.flag, Flag::kRej);
  EXPECT_EQ(r.annotations["reject_reason"], "undecryptable answer");
}

TEST(MockQhe, RoundTripEvalAndIntegrity) {
  Rng rng(8);
  qhe::SecretKey sk = qhe::SecretKey::generate(rng);
  for (int b : {0, 1}) {
    const qhe::MockCiphertext ct = sk.enc(b, rng);
    EXPECT_EQ(sk.dec(ct), b);
    const qhe::MockCiphertext flipped = qhe::eval(ct, [](int x) { return 1 - x; });
    EXPECT_EQ(flipped.nonce(), ct.nonce());
    EXPECT_EQ(sk.dec(flipped), 1 - b);
    EXPECT_EQ(qhe::MockCiphertext::from_wire(ct.to_wire()), ct);
  }
  EXPECT_NE(sk.enc(0, rng).nonce(), sk.enc(0, rng).nonce());
  // The issued-nonce set travels with the key.
  const qhe::MockCiphertext ct = sk.enc(1, rng);
  const qhe::SecretKey back = qhe::SecretKey::from_json(sk.to_json());
  EXPECT_EQ(back.dec(ct), 1);
  EXPECT_THROW(back.dec(sk.enc(1, rng)), IntegrityError);
  qhe::SecretKey stranger = qhe::SecretKey::generate(rng);
  EXPECT_THROW(stranger.dec(ct), IntegrityError);
  EXPECT_THROW(qhe::eval(ct, [](int) { return 2; }), ValidationError);
  Json bad = ct.to_wire();
  bad["payload"] = 2;
  EXPECT_THROW(qhe::MockCiphertext::from_wire(bad), ValidationError);
  bad = ct.to_wire();
  bad["nonce"] = "xyz";
  EXPECT_THROW(qhe::MockCiphertext::from_wire(bad), ValidationError);
}

}  // namespace
}  // namespace qkit::protocol
