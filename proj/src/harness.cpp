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

#include <algorithm>
#include <sstream>
#include <thread>
#include <vector>

#include "qkit/analysis.hpp"
#include "qkit/errors.hpp"
#include "qkit/protocols.hpp"

namespace qkit::harness {

namespace {

// Records are produced in batches so memory stays bounded while the writer
// still sees trials in order.
constexpr std::uint64_t kBatch = 4096;

Json opt_int(bool present, int value) { return present ? Json(value) : Json(nullptr); }

}  // namespace

// ---------------------------------------------------------------------------
// Config

bool RunConfig::device_mode() const { return prover.rfind(kDevicePrefix, 0) == 0; }

std::string RunConfig::device_path() const {
  if (!device_mode()) throw ValidationError("prover is not a device file");
  return prover.substr(std::string(kDevicePrefix).size());
}

provers::ProverKind RunConfig::prover_kind() const {
  return provers::prover_kind_from_string(prover);
}

void RunConfig::validate() const {
  if (trials == 0) throw ValidationError("trials must be at least 1");
  if (n_bits < 2) throw ValidationError("n_bits must be at least 2");
  if (threads == 0) throw ValidationError("threads must be at least 1");
  if (device_mode()) {
    if (device_path().empty()) throw ValidationError("device prover needs a file path");
    if (!c_hat) {
      throw ValidationError("device provers run only in Phase-B replay mode (give --c-hat)");
    }
    for (int c : {c_hat->first, c_hat->second}) {
      if (c != 1 && c != -1) throw ValidationError("c_hat values must be +1 or -1");
    }
    return;
  }
  if (c_hat) throw ValidationError("--c-hat applies only to device provers");
  prover_kind();
}

// ---------------------------------------------------------------------------
// Summaries

Rate make_rate(std::uint64_t accepts, std::uint64_t trials) {
  Rate r;
  r.trials = trials;
  r.accepts = accepts;
  if (trials > 0) {
    r.rate = static_cast<double>(accepts) / static_cast<double>(trials);
    r.interval = wilson_interval(accepts, trials);
  }
  return r;
}

namespace {

Json rate_json(const Rate& r) {
  Json j;
  j["trials"] = r.trials;
  j["accepts"] = r.accepts;
  j["rate"] = r.rate;
  j["wilson99"] = Json::array({r.interval.lo, r.interval.hi});
  return j;
}

}  // namespace

Json RunSummary::to_json() const {
  Json j;
  j["protocol"] = protocol::to_string(protocol);
  j["trials"] = trials;
  j["accepts"] = accepts;
  j["flag_counts"] = flag_counts;
  j["success_rate"] = success_rate;
  j["wilson99"] = Json::array({wilson.lo, wilson.hi});
  j["violations"] = violations;
  if (preimage) j["preimage_branch"] = rate_json(*preimage);
  if (equation) j["equation_branch"] = rate_json(*equation);
  return j;
}

SummaryBuilder::SummaryBuilder(ProtocolId id) {
  summary_.protocol = id;
  for (const char* f : {"acc", "rej", "cont"}) summary_.flag_counts[f] = 0;
}

void SummaryBuilder::add(const TrialRecord& record) {
  ++summary_.trials;
  if (record.accepted) ++summary_.accepts;
  ++summary_.flag_counts[record.flag];
  if (record.violation) ++summary_.violations;
  if (record.branch == "preimage") {
    ++pre_trials_;
    pre_accepts_ += record.accepted;
  } else if (record.branch == "equation") {
    ++eq_trials_;
    eq_accepts_ += record.accepted;
  }
}

RunSummary SummaryBuilder::finish() const {
  RunSummary s = summary_;
  const Rate all = make_rate(s.accepts, s.trials);
  s.success_rate = all.rate;
  s.wilson = all.interval;
  if (s.protocol == ProtocolId::kKcvy) {
    s.preimage = make_rate(pre_accepts_, pre_trials_);
    s.equation = make_rate(eq_accepts_, eq_trials_);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Trials

TrialRecord make_record(ProtocolId id, std::uint64_t seed, std::uint64_t trial,
                        const protocol::ExecutionResult& result) {
  TrialRecord rec;
  rec.accepted = result.accepted();
  rec.flag = protocol::to_string(result.flag);
  rec.violation = result.violation.has_value();
  const bool b = result.phase_b.has_value();
  Json& j = rec.json;
  j["protocol"] = protocol::to_string(id);
  j["seed"] = seed;
  j["trial"] = trial;
  j["flag"] = rec.flag;
  j["messages"] = result.transcript.messages_json();
  j["m"] = opt_int(b, b ? result.phase_b->m : 0);
  j["b"] = opt_int(b, b ? result.phase_b->b : 0);
  j["c_hat0"] = opt_int(b, b ? result.phase_b->c_hat0 : 0);
  j["c_hat1"] = opt_int(b, b ? result.phase_b->c_hat1 : 0);
  j["accepted"] = rec.accepted;
  j["verifier_rand"] = result.transcript.verifier_rand;
  if (const auto it = result.annotations.find("branch"); it != result.annotations.end()) {
    rec.branch = it->get<std::string>();
    j["branch"] = rec.branch;
  }
  if (result.violation) j["violation"] = *result.violation;
  return rec;
}

TrialRecord run_trial(const RunConfig& config, std::uint64_t trial, protocol::Prover* prover) {
  const protocol::VerifierConfig vc{config.tcf, config.n_bits};
  auto verifier = protocol::make_verifier(config.protocol, vc);
  std::unique_ptr<protocol::Prover> local;
  if (prover == nullptr) {
    local = provers::make_prover(config.protocol, config.prover_kind());
    prover = local.get();
  }
  Rng vrng = Rng::stream(config.seed, trial, Rng::Lane::kVerifier);
  Rng prng = Rng::stream(config.seed, trial, Rng::Lane::kProver);
  const protocol::ExecutionResult result =
      protocol::run_protocol_recorded(*verifier, *prover, vrng, prng);
  return make_record(config.protocol, config.seed, trial, result);
}

TrialRecord run_device_trial(const RunConfig& config, const provers::Device& device,
                             std::uint64_t trial) {
  if (!config.c_hat) throw ValidationError("device replay needs c_hat values");
  Rng vrng = Rng::stream(config.seed, trial, Rng::Lane::kVerifier);
  Rng prng = Rng::stream(config.seed, trial, Rng::Lane::kProver);
  protocol::ExecutionResult result;
  result.flag = protocol::Flag::kCont;
  result.transcript.protocol = config.protocol;
  protocol::PhaseBRecord pb;
  pb.c_hat0 = config.c_hat->first;
  pb.c_hat1 = config.c_hat->second;
  pb.m = vrng.bit();
  pb.b = provers::device_phase_b(device, pb.m, prng).b;
  pb.accepted = protocol::decide(pb.c_hat(), pb.b);
  result.phase_b = pb;
  auto& msgs = result.transcript.messages;
  using protocol::Direction;
  msgs.push_back({Direction::kToProver, protocol::challenge_message(pb.m)});
  msgs.push_back({Direction::kToVerifier, protocol::response_message(pb.b)});
  msgs.push_back({Direction::kToProver,
                  protocol::verdict_message(pb.accepted ? protocol::Flag::kAcc
                                                        : protocol::Flag::kRej)});
  Json vr;
  vr["mode"] = "device";
  vr["c_hat"] = Json::array({pb.c_hat0, pb.c_hat1});
  result.transcript.verifier_rand = vr;
  return make_record(config.protocol, config.seed, trial, result);
}

// ---------------------------------------------------------------------------
// Files

TranscriptWriter::TranscriptWriter(const std::string& path) : path_(path), out_(path) {
  if (!out_) throw IoError("cannot open transcript file '" + path + "'");
}

void TranscriptWriter::write(const Json& record) {
  out_ << record.dump() << '\n';
  if (!out_) throw IoError("write to '" + path_ + "' failed");
}

void TranscriptWriter::close() {
  out_.close();
  if (out_.fail()) throw IoError("closing '" + path_ + "' failed");
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ValidationError("'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  out.close();
  if (out.fail()) throw IoError("write to '" + path + "' failed");
}

provers::Device load_device(const std::string& path) {
  return provers::device_from_json(read_json_file(path));
}

// ---------------------------------------------------------------------------
// Runs

RunSummary run(const RunConfig& config, const std::function<void(const TrialRecord&)>& on_record) {
  config.validate();
  std::optional<provers::Device> device;
  if (config.device_mode()) device = load_device(config.device_path());
  std::optional<TranscriptWriter> writer;
  if (!config.output_path.empty()) writer.emplace(config.output_path);

  auto one = [&](std::uint64_t t) {
    return device ? run_device_trial(config, *device, t) : run_trial(config, t);
  };

  SummaryBuilder summary(config.protocol);
  const unsigned workers = static_cast<unsigned>(
      std::min<std::uint64_t>(config.threads, std::min(config.trials, kBatch)));
  std::vector<TrialRecord> batch;
  for (std::uint64_t start = 0; start < config.trials; start += kBatch) {
    const std::uint64_t count = std::min(kBatch, config.trials - start);
    batch.assign(count, TrialRecord{});
    if (workers <= 1) {
      for (std::uint64_t i = 0; i < count; ++i) batch[i] = one(start + i);
    } else {
      std::vector<std::exception_ptr> errors(workers);
      std::vector<std::thread> pool;
      for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          try {
            for (std::uint64_t i = w; i < count; i += workers) batch[i] = one(start + i);
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
      for (auto& th : pool) th.join();
      for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
    }
    for (const TrialRecord& rec : batch) {
      summary.add(rec);
      if (writer) writer->write(rec.json);
      if (on_record) on_record(rec);
    }
  }
  if (writer) writer->close();
  return summary.finish();
}

// ---------------------------------------------------------------------------
// Replay

ReplayReport replay_transcripts(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  ReplayReport report;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++report.records;
    Json rec;
    try {
      rec = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw ValidationError("record " + std::to_string(report.records) + " is not JSON");
    }
    if (!rec.is_object()) throw ValidationError("record is not an object");
    const Json& m = require(rec, "m");
    if (m.is_null()) continue;
    ++report.checked;
    const ProtocolId id = protocol::protocol_from_string(require_string(rec, "protocol"));
    const Json& vr = require(rec, "verifier_rand");
    std::pair<int, int> c;
    if (vr.is_object() && vr.value("mode", "") == "device") {
      c = {vr["c_hat"][0].get<int>(), vr["c_hat"][1].get<int>()};
    } else {
      c = protocol::recompute_c_hats(id, vr, require(rec, "messages"));
    }
    const int mm = m.get<int>();
    const bool ok = c.first == require(rec, "c_hat0").get<int>() &&
                    c.second == require(rec, "c_hat1").get<int>() &&
                    protocol::decide(mm == 0 ? c.first : c.second, require_bit(rec, "b")) ==
                        require(rec, "accepted").get<bool>();
    if (!ok) {
      if (report.mismatches == 0) {
        report.first_mismatch = "trial " + std::to_string(rec.value("trial", 0ULL));
      }
      ++report.mismatches;
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Device analysis

Json analyze_device(const provers::Device& device, int c_hat0, int c_hat1) {
  device.validate();
  const Eigen::MatrixXcd q0 = provers::correct_projector(device, 0, c_hat0);
  const Eigen::MatrixXcd q1 = provers::correct_projector(device, 1, c_hat1);
  const analysis::JordanReport report = analysis::jordan_decompose(q0, q1, device.state);
  const analysis::SoundnessCheck sc = analysis::soundness_check(report);
  const analysis::AnticommutatorResult ac =
      analysis::anticommutator_expectation(q0, q1, device.state);
  const analysis::DeviationMoments dm = analysis::deviation_moments(report);

  Json j;
  j["c_hat"] = Json::array({c_hat0, c_hat1});
  j["dim"] = device.dim();
  j["report"] = analysis::report_to_json(report);
  Json s;
  s["quantum_slack"] = sc.quantum_slack;
  s["classical_slack"] = sc.classical_slack ? Json(*sc.classical_slack) : Json(nullptr);
  s["tight"] = sc.tight;
  j["soundness"] = s;
  Json a;
  a["dense"] = ac.dense;
  a["block_formula"] = ac.block_formula;
  j["anticommutator"] = a;
  Json d;
  d["m1"] = dm.m1;
  d["m2"] = dm.m2;
  d["offgrid"] = dm.offgrid;
  d["eta_max"] = dm.eta_max;
  j["deviation_moments"] = d;
  Json v;
  v["quantum_bound_holds"] = sc.quantum_slack >= -1e-9;
  v["classical_bound_holds"] =
      sc.classical_slack ? Json(*sc.classical_slack >= -1e-9) : Json(nullptr);
  j["verdicts"] = v;
  return j;
}

}  // namespace qkit::harness
