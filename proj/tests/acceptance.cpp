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

// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <fmt/core.h>

#include "qkit/analysis.hpp"
#include "qkit/certify.hpp"
#include "qkit/extraction.hpp"
#include "qkit/harness.hpp"
#include "qkit/net.hpp"

namespace {

using namespace qkit;
using protocol::ProtocolId;

const double kOmega = std::pow(std::cos(std::numbers::pi / 8), 2);

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

harness::RunSummary run(ProtocolId id, const std::string& prover, std::uint64_t trials,
                        std::uint64_t seed) {
  harness::RunConfig c;
  c.protocol = id;
  c.prover = prover;
  c.trials = trials;
  c.seed = seed;
  return harness::run(c);
}

Verdict completeness_simplified() {
  const auto t0 = std::chrono::steady_clock::now();
  const harness::RunSummary s = run(ProtocolId::kSimplified, "honest-quantum", 100000, 1001);
  const double secs = seconds_since(t0);
  const double diff = std::abs(s.success_rate - kOmega);
  return {diff <= 0.005 && secs <= 30.0,
          fmt::format("rate={:.5f} |diff|={:.5f} time={:.2f}s (1 thread)", s.success_rate, diff, secs)};
}

Verdict completeness_kcvy() {
  const harness::RunSummary s = run(ProtocolId::kKcvy, "honest-quantum", 110000, 1002);
  const harness::Rate& pre = *s.preimage;
  const harness::Rate& eq = *s.equation;
  const double diff = std::abs(eq.rate - kOmega);
  return {pre.accepts == pre.trials && eq.trials >= 50000 && diff <= 0.005,
          fmt::format("preimage {}/{} equation rate={:.5f} over {} |diff|={:.5f}", pre.accepts,
                      pre.trials, eq.rate, eq.trials, diff)};
}

Verdict completeness_klvy() {
  const harness::RunSummary s = run(ProtocolId::kKlvyChsh, "honest-quantum", 100000, 1003);
  const double diff = std::abs(s.success_rate - kOmega);
  return {diff <= 0.005, fmt::format("rate={:.5f} |diff|={:.5f}", s.success_rate, diff)};
}

Verdict classical_ceiling() {
  const auto simp = certify::certify_classical_ceiling(ProtocolId::kSimplified, 2);
  const auto klvy = certify::certify_classical_ceiling(ProtocolId::kKlvyChsh, 0);
  const bool exact = simp.numerator * 4 == simp.denominator * 3 &&
                     klvy.numerator * 4 == klvy.denominator * 3;
  const harness::RunSummary s = run(ProtocolId::kSimplified, "optimal-classical", 100000, 1004);
  const double diff = std::abs(s.success_rate - 0.75);
  return {exact && diff <= 0.005,
          fmt::format("simplified n=2 {}/{}, klvy {}/{}, optimal classical rate={:.5f}",
                      simp.numerator, simp.denominator, klvy.numerator, klvy.denominator,
                      s.success_rate)};
}

Verdict jordan_correctness() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(1005);
  int max_dim = 0;
  double worst_sum = 0, worst_recon = 0, worst_parity = 0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t d = 2 + rng.below(31);
    const auto q0 = analysis::random_projector(d, rng.below(d + 1), rng);
    const auto q1 = analysis::random_projector(d, rng.below(d + 1), rng);
    const auto psi = analysis::random_state(d, rng);
    const analysis::JordanReport r = analysis::jordan_decompose(q0, q1, psi);
    double total = 0, formula = 0;
    for (const auto& b : r.blocks) {
      max_dim = std::max(max_dim, b.dim);
      total += b.weight;
      formula += b.weight * std::pow(std::cos(b.alpha - b.beta), 2);
    }
    // Reconstruction measured here, not taken from the report.
    const double recon = std::max((analysis::reconstruct(r, 0, d) - q0).norm(),
                                  (analysis::reconstruct(r, 1, d) - q1).norm());
    worst_sum = std::max(worst_sum, std::abs(total - 1));
    worst_recon = std::max(worst_recon, recon);
    worst_parity = std::max(worst_parity, std::abs(analysis::parity_success(q0, q1, psi) - formula));
  }
  const double secs = seconds_since(t0);
  return {max_dim <= 2 && worst_sum <= 1e-9 && worst_recon <= 1e-9 && worst_parity <= 1e-9 &&
              secs <= 10.0,
          fmt::format("max block dim {} |sum t-1|={:.1e} recon={:.1e} parity gap={:.1e} time={:.2f}s",
                      max_dim, worst_sum, worst_recon, worst_parity, secs)};
}

Verdict soundness_sweep() {
  Rng rng(1006);
  double worst = 1.0;
  for (int i = 0; i < 10000; ++i) {
    const std::size_t d = 1 + rng.below(16);
    const auto q0 = analysis::random_projector(d, rng.below(d + 1), rng);
    const auto q1 = analysis::random_projector(d, rng.below(d + 1), rng);
    const auto r = analysis::jordan_decompose(q0, q1, analysis::random_state(d, rng));
    worst = std::min(worst, analysis::soundness_check(r).quantum_slack);
  }
  const auto dev = analysis::block_device(std::numbers::pi / 8, -std::numbers::pi / 8);
  const double tight =
      analysis::soundness_check(analysis::jordan_decompose(dev.q0, dev.q1, dev.psi)).quantum_slack;
  return {worst >= -1e-9 && std::abs(tight) <= 1e-9,
          fmt::format("min slack={:.3e} over 1e4 devices, canonical slack={:.1e}", worst, tight)};
}

Verdict qubit_test() {
  const auto opt = analysis::block_device(std::numbers::pi / 8, -std::numbers::pi / 8);
  const double canonical = analysis::anticommutator_expectation(opt.q0, opt.q1, opt.psi).dense;
  Rng rng(1007);
  double worst_block = 0, worst_sign = 0;
  for (int i = 0; i < 100; ++i) {
    const double a = (rng.uniform() - 0.5) * analysis::kPi;
    const double b = (rng.uniform() - 0.5) * analysis::kPi;
    auto dev = analysis::block_device(a, b);
    dev.psi = analysis::random_state(2, rng);
    const auto r = analysis::anticommutator_expectation(dev.q0, dev.q1, dev.psi);
    worst_block = std::max(worst_block, std::abs(r.dense - 4 * std::pow(std::cos(2 * (a - b)), 2)));
    worst_block = std::max(worst_block, std::abs(r.dense - r.block_formula));
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(2, 2);
    worst_sign = std::max(
        worst_sign,
        std::abs(analysis::anticommutator_expectation(id - dev.q0, dev.q1, dev.psi).dense - r.dense));
    worst_sign = std::max(
        worst_sign,
        std::abs(analysis::anticommutator_expectation(dev.q0, id - dev.q1, dev.psi).dense - r.dense));
  }
  // Exact arithmetic: rank-one rational projectors v v^T / (v.v).
  using Q = boost::multiprecision::cpp_rational;
  auto observable = [](const std::vector<int>& v, int sign) {
    Q norm = 0;
    for (int x : v) norm += x * x;
    std::vector<std::vector<Q>> s(v.size(), std::vector<Q>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
      for (std::size_t k = 0; k < v.size(); ++k) {
        s[i][k] = sign * (Q(2 * v[i] * v[k]) / norm - (i == k ? 1 : 0));
      }
    }
    return s;
  };
  bool exact = true;
  for (int i = 0; i < 50; ++i) {
    const std::size_t d = 2 + rng.below(4);
    std::vector<int> u(d), w(d);
    std::vector<Q> psi(d);
    for (std::size_t k = 0; k < d; ++k) {
      u[k] = static_cast<int>(rng.below(9)) - 4;
      w[k] = static_cast<int>(rng.below(9)) - 4;
      psi[k] = Q(static_cast<int>(rng.below(7)) - 3, 1 + static_cast<int>(rng.below(5)));
    }
    u[0] = u[0] ? u[0] : 1;
    w[0] = w[0] ? w[0] : 1;
    const Q base = analysis::anticommutator_square(observable(u, 1), observable(w, 1), psi);
    exact = exact && analysis::anticommutator_square(observable(u, -1), observable(w, 1), psi) == base &&
            analysis::anticommutator_square(observable(u, 1), observable(w, -1), psi) == base;
  }
  return {canonical <= 1e-12 && worst_block <= 1e-9 && worst_sign <= 1e-12 && exact,
          fmt::format("canonical={:.1e} block gap={:.1e} sign gap={:.1e} exact={}", canonical,
                      worst_block, worst_sign, exact)};
}

Verdict trig_inequalities() {
  const analysis::TrigScan s = analysis::trig_scan(1000);
  return {s.points >= 1000000 && s.min_slack_main >= -1e-12 && std::abs(s.equality_slack) <= 1e-12 &&
              s.min_slack_offgrid >= -1e-12,
          fmt::format("{} points: min main={:.3e} equality={:.1e} min offgrid={:.3f}", s.points,
                      s.min_slack_main, s.equality_slack, s.min_slack_offgrid)};
}

Verdict goldreich_levin() {
  Rng rng(1009);
  const BitString a = BitString::from_uint(0b1011, 4);
  const extraction::GlExtractor perfect(extraction::perfect_predictor(a));
  int hits = 0;
  for (int i = 0; i < 1000; ++i) hits += perfect.sample(rng) == a;
  const extraction::InnerProductQuery q = extraction::and_predictor(a);
  const double eps = extraction::predictor_bias(q, a);
  const extraction::GlExtractor weak(q);
  int weak_hits = 0;
  for (int i = 0; i < 10000; ++i) weak_hits += weak.sample(rng) == a;
  const double f1 = hits / 1000.0, f2 = weak_hits / 10000.0;
  return {f1 >= 0.99 && std::abs(eps - 0.25) <= 1e-12 && f2 >= 4 * eps * eps * 0.9,
          fmt::format("perfect {:.3f}, eps={:.3f} freq {:.4f} vs {:.4f}", f1, eps, f2,
                      4 * eps * eps * 0.9)};
}

Verdict end_to_end_reduction() {
  Rng rng(1010);
  const tcf::KeyPair kp = tcf::gen(4, tcf::Family::kToy, rng);
  const tcf::Claw claw =
      tcf::invert(kp.trapdoor, kp.key, tcf::eval(kp.key, tcf::sample_domain(kp.key, rng)));
  const extraction::Adversary adv =
      extraction::trapdoor_adversary(ProtocolId::kSimplified, kp.key, claw, 0.95);
  const extraction::AdvantageEstimate est =
      extraction::estimate_parity_advantage(adv, claw, 20000, rng);
  const extraction::SimplifiedExtractor ex(adv);
  const int trials = 2000;
  int verified = 0;
  bool all_valid = true;
  for (int i = 0; i < trials; ++i) {
    const extraction::ExtractionOutcome out = ex.run(rng);
    if (!out.verified) continue;
    ++verified;
    const tcf::Claw& c = *out.claw;
    all_valid = all_valid && c.x0 != c.x1 && tcf::eval(kp.key, c.x0) == tcf::eval(kp.key, c.x1);
  }
  const double freq = verified / double(trials);
  const double need = 4 * est.delta * est.delta * 0.9;
  return {est.delta >= 0.45 && freq >= need && all_valid,
          fmt::format("delta={:.4f} freq={:.4f} >= {:.4f}, verified outputs valid={}", est.delta,
                      freq, need, all_valid)};
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  return lines;
}

Verdict split_process_determinism() {
  harness::RunConfig c;
  c.protocol = ProtocolId::kSimplified;
  c.trials = 1000;
  c.seed = 1011;
  const auto dir = std::filesystem::temp_directory_path();
  const std::string local = (dir / fmt::format("qkit_accept_{}_local.jsonl", ::getpid())).string();
  const std::string wire = (dir / fmt::format("qkit_accept_{}_wire.jsonl", ::getpid())).string();
  c.output_path = local;
  harness::run(c);

  net::Listener listener = net::Listener::bind({"127.0.0.1", 0});
  const std::uint16_t port = listener.port();
  const pid_t child = ::fork();
  if (child < 0) return {false, "fork failed"};
  if (child == 0) {
    int code = 0;
    try {
      net::Socket s = net::connect_to({"127.0.0.1", port});
      net::run_prover_session(s, provers::ProverKind::kHonestQuantum);
    } catch (...) {
      code = 1;
    }
    ::_exit(code);
  }
  net::Socket conn = listener.accept(net::kDefaultTimeoutMs);
  c.output_path = wire;
  const harness::RunSummary s = net::serve_session(conn, c);
  int status = 0;
  ::waitpid(child, &status, 0);
  const auto a = read_lines(local), b = read_lines(wire);
  std::filesystem::remove(local);
  std::filesystem::remove(wire);
  const bool same = a == b && a.size() == 1000;
  return {same && s.violations == 0 && WIFEXITED(status) && WEXITSTATUS(status) == 0,
          fmt::format("{} in-process vs {} wire records, identical={}, rate={:.4f}", a.size(),
                      b.size(), same, s.success_rate)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Verdict()> check;
  };
  const std::vector<Criterion> criteria = {
      {"honest completeness, simplified", completeness_simplified},
      {"honest completeness, kcvy branches", completeness_kcvy},
      {"honest completeness, klvy-chsh", completeness_klvy},
      {"classical ceiling 3/4", classical_ceiling},
      {"jordan decomposition", jordan_correctness},
      {"soundness inequality sweep", soundness_sweep},
      {"anticommutator qubit test", qubit_test},
      {"trigonometric inequalities", trig_inequalities},
      {"goldreich-levin extraction", goldreich_levin},
      {"end-to-end claw reduction", end_to_end_reduction},
      {"split-process determinism", split_process_determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("%s %2zu %s: %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].name,
                v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
