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

#ifndef QKIT_NET_HPP
#define QKIT_NET_HPP

#include <cstdint>
#include <optional>
#include <string>

#include "qkit/harness.hpp"
#include "qkit/json.hpp"
#include "qkit/protocol.hpp"
#include "qkit/provers.hpp"

/// Split verifier/prover processes over TCP. Every frame is a 4-byte
/// big-endian length followed by that many bytes of UTF-8 JSON.
///
/// Session flow, verifier first:
///   V: {"type":"session","protocol":..,"seed":..,"trials":..}
///   P: {"type":"ready","protocol":..,"prover":..}
///   per trial  V: {"type":"trial","index":t}, then the protocol messages
///   V: {"type":"end"}
/// Control frames never enter transcripts.
namespace qkit::net {

inline constexpr std::uint32_t kMaxFrameBytes = 1U << 20;
inline constexpr int kDefaultTimeoutMs = 10000;

/// Owning file descriptor.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  ~Socket();
  Socket(Socket&& other) noexcept;
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;

  int fd() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  void close();

 private:
  int fd_ = -1;
};

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
};

/// "host:port" or ":port".
Endpoint parse_endpoint(const std::string& text);

/// Throws IoError when the peer cannot be written to.
void write_frame(int fd, const Json& msg);
/// Reads one frame. Framing faults, bad JSON, end of stream and timeouts
/// throw ProtocolViolation attributed to `peer`.
Json read_frame(int fd, const std::string& peer, int timeout_ms = kDefaultTimeoutMs,
                std::uint32_t max_bytes = kMaxFrameBytes);

class Listener {
 public:
  /// Port 0 picks a free port; see port().
  static Listener bind(const Endpoint& at);
  std::uint16_t port() const { return port_; }
  /// Throws IoError on timeout (timeout_ms < 0 waits forever).
  Socket accept(int timeout_ms = -1);
  void close() { sock_.close(); }

 private:
  Socket sock_;
  std::uint16_t port_ = 0;
};

Socket connect_to(const Endpoint& at, int timeout_ms = kDefaultTimeoutMs);

/// Prover half seen from the verifier: forwards every verifier message and
/// waits for the reply (none for verdicts).
class RemoteProver final : public protocol::Prover {
 public:
  RemoteProver(int fd, protocol::ProtocolId id, int timeout_ms)
      : fd_(fd), id_(id), timeout_ms_(timeout_ms) {}
  protocol::ProtocolId protocol() const override { return id_; }
  std::optional<protocol::Message> respond(const protocol::Message& msg, Rng& rng) override;

 private:
  int fd_;
  protocol::ProtocolId id_;
  int timeout_ms_;
};

/// Verifier side of one session on an accepted connection. Trials run
/// sequentially; a protocol violation ends the session after its rej record
/// is emitted (RunSummary::violations > 0).
harness::RunSummary serve_session(Socket& conn, const harness::RunConfig& config,
                                  int timeout_ms = kDefaultTimeoutMs);

/// Prover side: answers one session. Returns the number of trials served.
std::uint64_t run_prover_session(Socket& conn, provers::ProverKind kind,
                                 int timeout_ms = kDefaultTimeoutMs);

}  // namespace qkit::net

#endif  // QKIT_NET_HPP
