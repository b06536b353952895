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

#ifndef QKIT_PROTOCOLS_HPP
#define QKIT_PROTOCOLS_HPP

#include <memory>
#include <optional>
#include <string>
#include <utility>

#include "qkit/bits.hpp"
#include "qkit/mock_qhe.hpp"
#include "qkit/protocol.hpp"
#include "qkit/tcf.hpp"

/// Concrete protocols: KCVY, its simplified variant, and KLVY compiled CHSH.
namespace qkit::protocol {

/// KCVY: r.(x0^x1) = 0 gives (-1)^{r.x0}; otherwise (-1)^{d.(x0^x1) + m}.
int kcvy_c_hat(const BitString& r, const BitString& x0, const BitString& x1, const BitString& d,
               int m);

/// Simplified KCVY with alpha = r0.x0 ^ r1.x1 and beta = d.(x0^x1):
/// alpha = 0 gives (-1)^{r0.x0}; alpha = 1 gives (-1)^{beta + m}.
int simplified_c_hat(const BitString& r0, const BitString& r1, const BitString& x0,
                     const BitString& x1, const BitString& d, int m);

/// (-1)^{a + x m}.
int klvy_c_hat(int x, int a, int m);

struct VerifierConfig {
  tcf::Family family = tcf::Family::kToy;
  /// Toy: domain width. Rabin: bit length of the smaller prime.
  std::size_t n_bits = 4;
};

enum class KcvyBranch { kPreimage, kEquation };

class SimplifiedVerifier final : public Verifier {
 public:
  explicit SimplifiedVerifier(VerifierConfig config) : config_(config) {}
  ProtocolId protocol() const override { return ProtocolId::kSimplified; }
  Step open(Rng& rng) override;
  Step on_message(const Message& msg, Rng& rng) override;
  int c_hat(int m) const override;
  Json private_record() const override;
  Json annotations() const override;

 private:
  enum class Stage { kInit, kAwaitY, kAwaitD, kDone };
  VerifierConfig config_;
  Stage stage_ = Stage::kInit;
  tcf::KeyPair keys_;
  std::string sentinel_;
  std::optional<tcf::Claw> claw_;
  BitString r0_, r1_, d_;
  std::string reject_reason_;
};

class KcvyVerifier final : public Verifier {
 public:
  explicit KcvyVerifier(VerifierConfig config) : config_(config) {}
  ProtocolId protocol() const override { return ProtocolId::kKcvy; }
  Step open(Rng& rng) override;
  Step on_message(const Message& msg, Rng& rng) override;
  int c_hat(int m) const override;
  Json private_record() const override;
  Json annotations() const override;

  std::optional<KcvyBranch> branch() const { return branch_; }

 private:
  enum class Stage { kInit, kAwaitY, kAwaitPreimage, kAwaitD, kDone };
  VerifierConfig config_;
  Stage stage_ = Stage::kInit;
  tcf::KeyPair keys_;
  std::string sentinel_;
  std::optional<tcf::Claw> claw_;
  std::optional<KcvyBranch> branch_;
  BitString r_, d_;
  std::string reject_reason_;
};

class KlvyChshVerifier final : public Verifier {
 public:
  KlvyChshVerifier() = default;
  ProtocolId protocol() const override { return ProtocolId::kKlvyChsh; }
  Step open(Rng& rng) override;
  Step on_message(const Message& msg, Rng& rng) override;
  int c_hat(int m) const override;
  Json private_record() const override;
  Json annotations() const override;

 private:
  enum class Stage { kInit, kAwaitAnswer, kDone };
  Stage stage_ = Stage::kInit;
  std::optional<qhe::SecretKey> sk_;
  std::string sentinel_;
  int x_ = 0;
  int a_ = 0;
  std::string reject_reason_;
};

std::unique_ptr<Verifier> make_verifier(ProtocolId id, const VerifierConfig& config);

/// Recomputes (c_hat0, c_hat1) of a finished cont run from the verifier's
/// private record and the message list (Transcript::messages_json form).
std::pair<int, int> recompute_c_hats(ProtocolId id, const Json& verifier_rand,
                                     const Json& messages);

// Message constructors and parsers shared by verifiers, provers and tests.
// Parsers throw ProtocolViolation attributed to `sender`.
std::string message_type(const Message& msg);
void expect_type(const Message& msg, const std::string& type, const std::string& sender);
BitString parse_bits(const Message& msg, const std::string& field, std::size_t width,
                     const std::string& sender);

Message key_message(const tcf::TcfKey& key);
tcf::TcfKey parse_key_message(const Message& msg);
Message y_message(const BitString& y);
Message r_message(const BitString& r0, const BitString& r1);
Message d_message(const BitString& d);
Message branch_message(KcvyBranch branch, const BitString* r);
Message preimage_message(const BitString& x);
Message response_message(int b);

}  // namespace qkit::protocol

#endif  // QKIT_PROTOCOLS_HPP
