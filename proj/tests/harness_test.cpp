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

#include "qkit/harness.hpp"

#include <sys/socket.h>
#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <thread>
#include <vector>

#include <gtest/gtest.h>

#include "qkit/certify.hpp"
#include "qkit/errors.hpp"
#include "qkit/net.hpp"

namespace qkit::harness {
namespace {

using certify::ViewModel;

const double kOmegaOracle = std::pow(std::cos(std::numbers::pi / 8), 2);

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() /
          ("qkit_" + std::to_string(::getpid()) + "_" + name))
      .string();
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  return lines;
}

// Classical CHSH by brute force: Alice's answer a(x), Bob's table b(y); win iff a ^ b = x & y.
double chsh_classical_oracle() {
  int best = 0;
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      int wins = 0;
      for (int x = 0; x < 2; ++x) {
        for (int y = 0; y < 2; ++y) wins += (((a >> x) & 1) ^ ((b >> y) & 1)) == (x & y);
      }
      best = std::max(best, wins);
    }
  }
  return best / 4.0;
}

TEST(Certify, SimplifiedAndKcvyCeilingIsThreeQuarters) {
  for (auto id : {ProtocolId::kSimplified, ProtocolId::kKcvy}) {
    for (std::size_t n : {2, 3}) {
      const auto rep = certify::certify_classical_ceiling(id, n);
      EXPECT_EQ(rep.numerator, 3u) << protocol::to_string(id) << " n=" << n;
      EXPECT_EQ(rep.denominator, 4u);
      EXPECT_FALSE(rep.parity_leaked);
      EXPECT_GT(rep.evaluations, 0u);
    }
  }
}

TEST(Certify, KlvyMatchesChshOracle) {
  const auto rep = certify::certify_classical_ceiling(ProtocolId::kKlvyChsh, 0);
  EXPECT_DOUBLE_EQ(rep.value, chsh_classical_oracle());
  EXPECT_EQ(rep.numerator * 4, rep.denominator * 3);
}

TEST(Certify, LeakedSecretIsFlagged) {
  for (auto id : {ProtocolId::kSimplified, ProtocolId::kKcvy, ProtocolId::kKlvyChsh}) {
    const auto rep = certify::certify_classical_ceiling(id, 2, ViewModel::kKeyLeaked);
    EXPECT_EQ(rep.numerator, rep.denominator) << protocol::to_string(id);
    EXPECT_TRUE(rep.parity_leaked);
  }
}

TEST(Certify, FullTranscriptIsAtLeastPrivateView) {
  const auto priv = certify::certify_classical_ceiling(ProtocolId::kSimplified, 2);
  const auto full =
      certify::certify_classical_ceiling(ProtocolId::kSimplified, 2, ViewModel::kFullTranscript);
  EXPECT_GE(full.value, priv.value);
  EXPECT_EQ(full.parity_leaked, 4 * full.numerator > 3 * full.denominator);
}

TEST(Certify, BudgetAndNames) {
  EXPECT_THROW(certify::certify_classical_ceiling(ProtocolId::kSimplified, 4), CapacityError);
  EXPECT_THROW(certify::certify_classical_ceiling(ProtocolId::kSimplified, 1), ValidationError);
  EXPECT_EQ(certify::view_from_string("key-leaked"), ViewModel::kKeyLeaked);
  EXPECT_THROW(certify::view_from_string("x"), ValidationError);
}

TEST(RunConfig, Validation) {
  RunConfig c;
  c.trials = 0;
  EXPECT_THROW(c.validate(), ValidationError);
  c.trials = 1;
  c.n_bits = 1;
  EXPECT_THROW(c.validate(), ValidationError);
  c.n_bits = 4;
  c.prover = "device:x.json";
  EXPECT_THROW(c.validate(), ValidationError);
  c.c_hat = std::pair{1, -1};
  EXPECT_NO_THROW(c.validate());
  c.prover = "honest-quantum";
  EXPECT_THROW(c.validate(), ValidationError);
  c.c_hat.reset();
  c.prover = "psychic";
  EXPECT_THROW(c.validate(), ValidationError);
}

TEST(Run, ThreadCountDoesNotChangeRecords) {
  RunConfig c;
  c.protocol = ProtocolId::kKcvy;
  c.trials = 300;
  c.seed = 77;
  std::vector<std::string> a, b;
  run(c, [&](const TrialRecord& r) { a.push_back(r.json.dump()); });
  c.threads = 4;
  run(c, [&](const TrialRecord& r) { b.push_back(r.json.dump()); });
  EXPECT_EQ(a, b);
}

TEST(Run, RecordsCarryDocumentedFields) {
  RunConfig c;
  c.protocol = ProtocolId::kKcvy;
  c.trials = 40;
  c.seed = 5;
  run(c, [&](const TrialRecord& r) {
    for (const char* f : {"protocol", "seed", "trial", "flag", "messages", "m", "b", "c_hat0",
                          "c_hat1", "accepted", "verifier_rand", "branch"}) {
      EXPECT_TRUE(r.json.contains(f)) << f;
    }
    EXPECT_EQ(r.json["m"].is_null(), r.branch == "preimage");
  });
}

TEST(Run, OptimalClassicalNearThreeQuarters) {
  RunConfig c;
  c.prover = "optimal-classical";
  c.trials = 20000;
  c.seed = 9;
  c.threads = 4;
  const RunSummary s = run(c);
  EXPECT_TRUE(s.wilson.contains(0.75)) << s.success_rate;
  EXPECT_LE(s.wilson.lo, s.success_rate);
  EXPECT_GE(s.wilson.hi, s.success_rate);
}

TEST(Run, KcvyBranchRates) {
  RunConfig c;
  c.protocol = ProtocolId::kKcvy;
  c.trials = 20000;
  c.seed = 10;
  c.threads = 4;
  const RunSummary s = run(c);
  ASSERT_TRUE(s.preimage && s.equation);
  EXPECT_EQ(s.preimage->accepts, s.preimage->trials);
  EXPECT_TRUE(s.equation->interval.contains(kOmegaOracle)) << s.equation->rate;
  EXPECT_EQ(s.preimage->trials + s.equation->trials, s.trials);
}

// 100 independent seeds; nominal coverage is 99%, asserted at 95% to keep
// the check stable under binomial spread of the coverage count itself.
TEST(Statistics, WilsonCoverageOverSeeds) {
  int covered = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    RunConfig c;
    c.trials = 2000;
    c.seed = 5000 + seed;
    c.threads = 4;
    covered += run(c).wilson.contains(kOmegaOracle);
  }
  RecordProperty("coverage", covered);
  EXPECT_GE(covered, 95) << covered << "/100";
}

TEST(Replay, RecomputesAndDetectsTampering) {
  const std::string path = temp_path("replay.jsonl");
  RunConfig c;
  c.trials = 200;
  c.seed = 3;
  c.output_path = path;
  run(c);
  ReplayReport ok = replay_transcripts(path);
  EXPECT_EQ(ok.records, 200u);
  EXPECT_EQ(ok.checked, 200u);
  EXPECT_EQ(ok.mismatches, 0u);

  std::vector<std::string> lines = read_lines(path);
  Json rec = Json::parse(lines[0]);
  rec["accepted"] = !rec["accepted"].get<bool>();
  lines[0] = rec.dump();
  std::ofstream out(path);
  for (const auto& l : lines) out << l << '\n';
  out.close();
  EXPECT_EQ(replay_transcripts(path).mismatches, 1u);
  std::filesystem::remove(path);
}

TEST(Device, ReplayAndAnalysis) {
  const std::string path = temp_path("device.json");
  write_text_file(path, provers::device_to_json(provers::canonical_optimal_device()).dump());
  RunConfig c;
  c.prover = std::string(kDevicePrefix) + path;
  c.c_hat = std::pair{1, 1};
  c.trials = 20000;
  c.seed = 4;
  const RunSummary s = run(c);
  EXPECT_TRUE(s.wilson.contains(kOmegaOracle)) << s.success_rate;

  const Json a = analyze_device(load_device(path), 1, 1);
  EXPECT_TRUE(a["soundness"]["tight"].get<bool>());
  EXPECT_LE(std::abs(a["anticommutator"]["dense"].get<double>()), 1e-12);
  EXPECT_TRUE(a["verdicts"]["quantum_bound_holds"].get<bool>());
  std::filesystem::remove(path);
}

TEST(Io, MissingFilesAreIoErrors) {
  EXPECT_THROW(load_device("/nonexistent/dev.json"), IoError);
  EXPECT_THROW(replay_transcripts("/nonexistent/t.jsonl"), IoError);
}

TEST(Net, EndpointParsing) {
  EXPECT_EQ(net::parse_endpoint("127.0.0.1:8080").port, 8080);
  EXPECT_EQ(net::parse_endpoint(":0").host, "127.0.0.1");
  EXPECT_THROW(net::parse_endpoint("localhost"), ValidationError);
  EXPECT_THROW(net::parse_endpoint("h:99999"), ValidationError);
}

TEST(Net, LoopbackMatchesInProcess) {
  RunConfig c;
  c.protocol = ProtocolId::kSimplified;
  c.trials = 150;
  c.seed = 2026;
  std::vector<std::string> local;
  run(c, [&](const TrialRecord& r) { local.push_back(r.json.dump()); });

  net::Listener listener = net::Listener::bind({"127.0.0.1", 0});
  const std::uint16_t port = listener.port();
  std::uint64_t served = 0;
  std::thread prover([&] {
    net::Socket s = net::connect_to({"127.0.0.1", port});
    served = net::run_prover_session(s, provers::ProverKind::kHonestQuantum);
  });
  net::Socket conn = listener.accept(10000);
  const std::string path = temp_path("wire.jsonl");
  c.output_path = path;
  const RunSummary s = net::serve_session(conn, c);
  prover.join();
  EXPECT_EQ(served, 150u);
  EXPECT_EQ(s.violations, 0u);
  EXPECT_EQ(read_lines(path), local);
  std::filesystem::remove(path);
}

TEST(Net, MalformedLengthPrefixIsRecordedAsViolation) {
  net::Listener listener = net::Listener::bind({"127.0.0.1", 0});
  const std::uint16_t port = listener.port();
  std::thread rogue([&] {
    net::Socket s = net::connect_to({"127.0.0.1", port});
    const Json hello = net::read_frame(s.fd(), "verifier");
    net::write_frame(s.fd(), Json{{"type", "ready"}, {"protocol", hello["protocol"]}});
    net::read_frame(s.fd(), "verifier");  // trial
    net::read_frame(s.fd(), "verifier");  // key
    const unsigned char bad[4] = {0xff, 0xff, 0xff, 0xff};
    ASSERT_EQ(::write(s.fd(), bad, 4), 4);
    char sink[16];
    while (::read(s.fd(), sink, sizeof sink) > 0) {
    }
  });
  net::Socket conn = listener.accept(10000);
  RunConfig c;
  c.trials = 5;
  c.seed = 1;
  std::vector<TrialRecord> records;
  const RunSummary s = net::serve_session(conn, c);
  rogue.join();
  EXPECT_EQ(s.violations, 1u);
  EXPECT_EQ(s.trials, 1u);
  EXPECT_EQ(s.flag_counts.at("rej"), 1u);
}

TEST(Net, FrameRoundTripAndTimeout) {
  int fds[2];
  ASSERT_EQ(::socketpair(AF_UNIX, SOCK_STREAM, 0, fds), 0);
  net::write_frame(fds[1], Json{{"type", "x"}, {"v", 1}});
  EXPECT_EQ(net::read_frame(fds[0], "peer")["v"], 1);
  EXPECT_THROW(net::read_frame(fds[0], "peer", 50), ProtocolViolation);
  ::close(fds[0]);
  ::close(fds[1]);
}

}  // namespace
}  // namespace qkit::harness
