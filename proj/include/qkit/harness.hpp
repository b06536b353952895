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

#ifndef QKIT_HARNESS_HPP
#define QKIT_HARNESS_HPP

#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>

#include "qkit/json.hpp"
#include "qkit/protocol.hpp"
#include "qkit/provers.hpp"
#include "qkit/stats.hpp"
#include "qkit/tcf.hpp"

/// Monte-Carlo runs, transcript persistence, replay and device analysis.
namespace qkit::harness {

using protocol::ProtocolId;

inline constexpr const char* kDevicePrefix = "device:";

struct RunConfig {
  ProtocolId protocol = ProtocolId::kSimplified;
  /// "honest-quantum", "optimal-classical" or "device:<path>".
  std::string prover = "honest-quantum";
  tcf::Family tcf = tcf::Family::kToy;
  std::size_t n_bits = 4;
  std::uint64_t trials = 1;
  std::uint64_t seed = 0;
  /// JSONL transcript destination; empty for none.
  std::string output_path;
  unsigned threads = 1;
  /// Phase-B replay of a device file needs the (c_hat0, c_hat1) it is scored against.
  std::optional<std::pair<int, int>> c_hat;

  bool device_mode() const;
  std::string device_path() const;
  provers::ProverKind prover_kind() const;
  /// Throws ValidationError on a bad combination of fields.
  void validate() const;
};

struct Rate {
  std::uint64_t trials = 0;
  std::uint64_t accepts = 0;
  double rate = 0.0;
  Interval interval;
};

Rate make_rate(std::uint64_t accepts, std::uint64_t trials);

struct RunSummary {
  ProtocolId protocol = ProtocolId::kSimplified;
  std::uint64_t trials = 0;
  std::uint64_t accepts = 0;
  std::map<std::string, std::uint64_t> flag_counts;
  double success_rate = 0.0;
  Interval wilson;
  std::uint64_t violations = 0;
  /// KCVY only.
  std::optional<Rate> preimage;
  std::optional<Rate> equation;

  Json to_json() const;
};

/// One finished trial: its JSONL record plus what the summary needs.
struct TrialRecord {
  Json json;
  bool accepted = false;
  std::string flag;
  std::string branch;
  bool violation = false;
};

/// {"protocol","seed","trial","flag","messages","m","b","c_hat0","c_hat1",
///  "accepted","verifier_rand"} plus "branch" / "violation" when present.
TrialRecord make_record(ProtocolId id, std::uint64_t seed, std::uint64_t trial,
                        const protocol::ExecutionResult& result);

/// One protocol execution on the trial's verifier and prover streams.
/// With a prover override the given prover is used instead of a fresh local one.
TrialRecord run_trial(const RunConfig& config, std::uint64_t trial,
                      protocol::Prover* prover = nullptr);

/// Phase-B-only replay of a device against fixed c_hat values.
TrialRecord run_device_trial(const RunConfig& config, const provers::Device& device,
                             std::uint64_t trial);

/// Single writer for JSONL transcripts. Throws IoError on failure.
class TranscriptWriter {
 public:
  explicit TranscriptWriter(const std::string& path);
  void write(const Json& record);
  void close();

 private:
  std::string path_;
  std::ofstream out_;
};

/// Accumulates trial records in order.
class SummaryBuilder {
 public:
  explicit SummaryBuilder(ProtocolId id);
  void add(const TrialRecord& record);
  RunSummary finish() const;

 private:
  RunSummary summary_;
  std::uint64_t pre_trials_ = 0, pre_accepts_ = 0, eq_trials_ = 0, eq_accepts_ = 0;
};

/// Runs all trials over `threads` workers. Records reach `on_record` (and the
/// transcript file) in trial order regardless of scheduling.
RunSummary run(const RunConfig& config,
               const std::function<void(const TrialRecord&)>& on_record = {});

provers::Device load_device(const std::string& path);
Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

struct ReplayReport {
  std::uint64_t records = 0;
  std::uint64_t checked = 0;
  std::uint64_t mismatches = 0;
  std::string first_mismatch;
};

/// Recomputes c_hat values and accept decisions for every Phase-B record.
ReplayReport replay_transcripts(const std::string& path);

/// Jordan report, soundness slacks, anticommutator and deviation moments of a
/// device scored against (c_hat0, c_hat1).
Json analyze_device(const provers::Device& device, int c_hat0, int c_hat1);

}  // namespace qkit::harness

#endif  // QKIT_HARNESS_HPP
