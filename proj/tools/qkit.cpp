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

// qkit command-line front end.
//
//   qkit run --protocol simplified --trials 100000 --seed 1 --out t.jsonl
//   qkit certify-classical --protocol kcvy --n-bits 3
//   qkit analyze --device data/devices/canonical_optimal.json --c-hat 1,1
//   qkit bounds --grid 1000
//   qkit extract --adversary data/adversaries/simplified_n2.json --trials 1000 --seed 7
//   qkit serve --listen 127.0.0.1:7000 --trials 1000 --seed 1
//   qkit prove --connect 127.0.0.1:7000
//   qkit replay --transcripts t.jsonl

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <utility>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "qkit/analysis.hpp"
#include "qkit/certify.hpp"
#include "qkit/errors.hpp"
#include "qkit/extraction.hpp"
#include "qkit/harness.hpp"
#include "qkit/net.hpp"

namespace {

using namespace qkit;

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("qkit");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* level = std::getenv("QKIT_LOG")) {
    spdlog::set_level(spdlog::level::from_str(level));
  }
}

std::pair<int, int> parse_c_hat(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw ValidationError("--c-hat expects two signs, e.g. 1,-1");
  auto sign = [&](const std::string& s) {
    if (s == "1" || s == "+1") return 1;
    if (s == "-1") return -1;
    throw ValidationError("c_hat entries must be +1 or -1, got '" + s + "'");
  };
  return {sign(text.substr(0, comma)), sign(text.substr(comma + 1))};
}

void emit(const Json& j, const std::string& path) {
  std::cout << j.dump(2) << '\n';
  if (!path.empty()) harness::write_text_file(path, j.dump(2) + "\n");
}

// Flags shared by `run` and `serve`.
struct RunFlags {
  std::string protocol = "simplified";
  std::string prover = "honest-quantum";
  std::string tcf = "toy";
  std::size_t n_bits = 4;
  std::uint64_t trials = 1;
  std::uint64_t seed = 0;
  std::string out;
  unsigned threads = 1;
  std::string c_hat;
  std::string summary;

  void attach(CLI::App* cmd, bool seed_required) {
    cmd->add_option("--protocol", protocol, "simplified | kcvy | klvy-chsh")->capture_default_str();
    cmd->add_option("--tcf", tcf, "toy | rabin")->capture_default_str();
    cmd->add_option("--n-bits", n_bits, "toy domain width or Rabin prime size")
        ->capture_default_str();
    cmd->add_option("--trials", trials)->capture_default_str();
    auto* s = cmd->add_option("--seed", seed, "64-bit master seed");
    if (seed_required) s->required();
    cmd->add_option("--out", out, "JSONL transcript path");
    cmd->add_option("--summary", summary, "write the summary JSON here as well");
  }

  harness::RunConfig config() const {
    harness::RunConfig c;
    c.protocol = protocol::protocol_from_string(protocol);
    c.prover = prover;
    c.tcf = tcf::family_from_string(tcf);
    c.n_bits = n_bits;
    c.trials = trials;
    c.seed = seed;
    c.output_path = out;
    c.threads = threads;
    if (!c_hat.empty()) c.c_hat = parse_c_hat(c_hat);
    c.validate();
    return c;
  }
};

int cmd_run(const RunFlags& f) {
  const harness::RunConfig c = f.config();
  spdlog::info("run {} x{} seed {} ({} threads)", f.protocol, c.trials, c.seed, c.threads);
  const harness::RunSummary s = harness::run(c);
  emit(s.to_json(), f.summary);
  return 0;
}

int cmd_serve(const RunFlags& f, const std::string& listen, int timeout_ms) {
  const harness::RunConfig c = f.config();
  net::Listener listener = net::Listener::bind(net::parse_endpoint(listen));
  spdlog::info("verifier listening on port {}", listener.port());
  std::cerr << "listening on " << listener.port() << std::endl;
  net::Socket conn = listener.accept(-1);
  const harness::RunSummary s = net::serve_session(conn, c, timeout_ms);
  emit(s.to_json(), f.summary);
  return s.violations > 0 ? static_cast<int>(ExitCode::kProtocolViolation) : 0;
}

int cmd_prove(const std::string& addr, const std::string& prover, int timeout_ms) {
  net::Socket conn = net::connect_to(net::parse_endpoint(addr), timeout_ms);
  const std::uint64_t served =
      net::run_prover_session(conn, provers::prover_kind_from_string(prover), timeout_ms);
  spdlog::info("served {} trials", served);
  Json j;
  j["trials_served"] = served;
  std::cout << j.dump() << '\n';
  return 0;
}

int cmd_certify(const std::string& proto, std::size_t n_bits, const std::string& view,
                const std::string& out) {
  const auto rep = certify::certify_classical_ceiling(protocol::protocol_from_string(proto), n_bits,
                                                      certify::view_from_string(view));
  emit(rep.to_json(), out);
  return 0;
}

int cmd_analyze(const std::string& device, const std::string& c_hat, const std::string& out,
                const std::string& csv) {
  const provers::Device dev = harness::load_device(device);
  const auto [c0, c1] = parse_c_hat(c_hat);
  const Json report = harness::analyze_device(dev, c0, c1);
  emit(report, out);
  if (!csv.empty()) {
    const analysis::JordanReport r =
        analysis::jordan_decompose(provers::correct_projector(dev, 0, c0),
                                   provers::correct_projector(dev, 1, c1), dev.state);
    harness::write_text_file(csv, analysis::report_to_csv(r));
  }
  return 0;
}

int cmd_bounds(std::size_t grid, const std::string& out) {
  const analysis::TrigScan scan = analysis::trig_scan(grid);
  Json j;
  j["grid_points_per_axis"] = grid;
  j["evaluations"] = scan.points;
  j["min_slack_main"] = scan.min_slack_main;
  j["argmin"] = Json::array({scan.argmin_alpha, scan.argmin_beta});
  j["equality_slack"] = scan.equality_slack;
  j["min_slack_offgrid"] = scan.min_slack_offgrid;
  j["main_holds"] = scan.min_slack_main >= -1e-12;
  j["offgrid_holds"] = scan.min_slack_offgrid >= -1e-12;
  Json trend = Json::array();
  for (const auto& p : analysis::qubit_trend({0.001, 0.01, 0.05})) {
    trend.push_back({{"epsilon", p.epsilon},
                     {"alpha", p.alpha},
                     {"anticommutator", p.anticommutator},
                     {"ratio", p.ratio}});
  }
  j["qubit_trend"] = trend;
  emit(j, out);
  return 0;
}

struct ExtractFlags {
  std::string adversary;
  std::string trapdoor;
  std::string protocol = "simplified";
  std::size_t n_bits = 2;
  double weight = 1.0;
  double kappa = 0.0;
  std::uint64_t trials = 1000;
  std::uint64_t samples = 20000;
  std::uint64_t seed = 0;
  std::string save;
  std::string out;
};

int cmd_extract(const ExtractFlags& f) {
  Rng rng(f.seed);
  extraction::Adversary adv;
  tcf::Claw claw;
  if (f.adversary.empty()) {
    // Demo: build a trapdoor adversary on a fresh toy key.
    const auto id = protocol::protocol_from_string(f.protocol);
    const tcf::KeyPair kp = tcf::gen(f.n_bits, tcf::Family::kToy, rng);
    claw = tcf::invert(kp.trapdoor, kp.key, tcf::eval(kp.key, tcf::sample_domain(kp.key, rng)));
    adv = extraction::trapdoor_adversary(id, kp.key, claw, f.weight, f.kappa);
    if (!f.save.empty()) {
      Json j = extraction::adversary_to_json(adv);
      j["trapdoor"] = tcf::trapdoor_to_json(kp.key, kp.trapdoor);
      harness::write_text_file(f.save, j.dump(2) + "\n");
    }
  } else {
    const Json j = harness::read_json_file(f.adversary);
    adv = extraction::adversary_from_json(j);
    Json td;
    if (!f.trapdoor.empty()) {
      td = harness::read_json_file(f.trapdoor);
    } else if (j.contains("trapdoor")) {
      td = j["trapdoor"];
    } else {
      throw ValidationError("claw verification needs the trapdoor (--trapdoor or a 'trapdoor' field)");
    }
    claw = tcf::invert(tcf::trapdoor_from_json(adv.key, td), adv.key, adv.y);
  }
  const extraction::ExtractionReport rep =
      extraction::run_claw_extraction(adv, claw, f.trials, f.samples, rng);
  emit(extraction::extraction_report_to_json(rep), f.out);
  return 0;
}

int cmd_replay(const std::string& path) {
  const harness::ReplayReport r = harness::replay_transcripts(path);
  Json j;
  j["records"] = r.records;
  j["checked"] = r.checked;
  j["mismatches"] = r.mismatches;
  if (!r.first_mismatch.empty()) j["first_mismatch"] = r.first_mismatch;
  std::cout << j.dump(2) << '\n';
  return r.mismatches > 0 ? static_cast<int>(ExitCode::kProtocolViolation) : 0;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"qkit: proof-of-quantumness protocols, provers and analysis"};
  app.require_subcommand(1);

  RunFlags run_flags;
  auto* run = app.add_subcommand("run", "Monte-Carlo protocol runs");
  run_flags.attach(run, true);
  run->add_option("--prover", run_flags.prover,
                  "honest-quantum | optimal-classical | device:<file>")
      ->capture_default_str();
  run->add_option("--threads", run_flags.threads)->capture_default_str();
  run->add_option("--c-hat", run_flags.c_hat, "c_hat0,c_hat1 for device replay");

  std::string cert_protocol = "simplified", cert_view = "prover-generated", cert_out;
  std::size_t cert_bits = 2;
  auto* cert = app.add_subcommand("certify-classical", "exhaustive classical ceiling");
  cert->add_option("--protocol", cert_protocol)->capture_default_str();
  cert->add_option("--n-bits", cert_bits, "toy width, 2 or 3")->capture_default_str();
  cert->add_option("--view", cert_view, "prover-generated | full-transcript | key-leaked")
      ->capture_default_str();
  cert->add_option("--out", cert_out);

  std::string device, c_hat = "1,1", an_out, an_csv;
  auto* an = app.add_subcommand("analyze", "Jordan report and bound verdicts for a device");
  an->add_option("--device", device)->required();
  an->add_option("--c-hat", c_hat)->capture_default_str();
  an->add_option("--out", an_out);
  an->add_option("--csv", an_csv, "one row per block: t,alpha,beta");

  std::size_t grid = 1000;
  std::string bounds_out;
  auto* bounds = app.add_subcommand("bounds", "grid scan of the trigonometric inequalities");
  bounds->add_option("--grid", grid, "points per axis")->capture_default_str();
  bounds->add_option("--out", bounds_out);

  ExtractFlags ex;
  auto* extract = app.add_subcommand("extract", "coherent claw extraction from an adversary");
  extract->add_option("--adversary", ex.adversary, "adversary JSON; omit for a trapdoor demo");
  extract->add_option("--trapdoor", ex.trapdoor, "trapdoor JSON used to verify claws");
  extract->add_option("--protocol", ex.protocol, "demo only")->capture_default_str();
  extract->add_option("--n-bits", ex.n_bits, "demo only")->capture_default_str();
  extract->add_option("--weight", ex.weight, "demo: parity advantage 2*delta")->capture_default_str();
  extract->add_option("--kappa", ex.kappa, "demo: preimage failure")->capture_default_str();
  extract->add_option("--save-adversary", ex.save, "demo: write the adversary here");
  extract->add_option("--trials", ex.trials)->capture_default_str();
  extract->add_option("--samples", ex.samples, "samples for the advantage estimate")
      ->capture_default_str();
  extract->add_option("--seed", ex.seed)->required();
  extract->add_option("--out", ex.out);

  RunFlags serve_flags;
  std::string listen = "127.0.0.1:7000";
  int timeout_ms = net::kDefaultTimeoutMs;
  auto* serve = app.add_subcommand("serve", "verifier side of a split-process run");
  serve_flags.attach(serve, true);
  serve->add_option("--listen", listen)->capture_default_str();
  serve->add_option("--timeout-ms", timeout_ms)->capture_default_str();

  std::string connect = "127.0.0.1:7000", prove_kind = "honest-quantum";
  auto* prove = app.add_subcommand("prove", "prover side of a split-process run");
  prove->add_option("--connect", connect)->capture_default_str();
  prove->add_option("--prover", prove_kind)->capture_default_str();
  prove->add_option("--timeout-ms", timeout_ms)->capture_default_str();

  std::string transcripts;
  auto* replay = app.add_subcommand("replay", "recompute decisions of a JSONL transcript");
  replay->add_option("--transcripts", transcripts)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ExitCode::kValidation);
  }

  try {
    if (*run) return cmd_run(run_flags);
    if (*cert) return cmd_certify(cert_protocol, cert_bits, cert_view, cert_out);
    if (*an) return cmd_analyze(device, c_hat, an_out, an_csv);
    if (*bounds) return cmd_bounds(grid, bounds_out);
    if (*extract) return cmd_extract(ex);
    if (*serve) return cmd_serve(serve_flags, listen, timeout_ms);
    if (*prove) return cmd_prove(connect, prove_kind, timeout_ms);
    if (*replay) return cmd_replay(transcripts);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.exit_code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kValidation);
  }
  return 0;
}
