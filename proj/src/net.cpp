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

#include "qkit/net.hpp"

#include <arpa/inet.h>
#include <cerrno>
#include <csignal>
#include <cstring>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <memory>
#include <vector>

#include "qkit/errors.hpp"

namespace qkit::net {

namespace {

std::string sys_error(const std::string& what) { return what + ": " + std::strerror(errno); }

// Wait until fd is readable. False on timeout.
bool wait_readable(int fd, int timeout_ms) {
  pollfd p{fd, POLLIN, 0};
  for (;;) {
    const int rc = ::poll(&p, 1, timeout_ms);
    if (rc > 0) return true;
    if (rc == 0) return false;
    if (errno != EINTR) throw IoError(sys_error("poll"));
  }
}

void read_exact(int fd, char* buf, std::size_t len, const std::string& peer, int timeout_ms) {
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
  std::size_t got = 0;
  while (got < len) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                          deadline - std::chrono::steady_clock::now())
                          .count();
    if (left <= 0 || !wait_readable(fd, static_cast<int>(left))) {
      throw ProtocolViolation(peer, "timed out waiting for a frame");
    }
    const ssize_t n = ::recv(fd, buf + got, len - got, 0);
    if (n == 0) throw ProtocolViolation(peer, "connection closed mid-session");
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      throw ProtocolViolation(peer, sys_error("receive failed"));
    }
    got += static_cast<std::size_t>(n);
  }
}

sockaddr_in resolve(const Endpoint& at) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(at.port);
  if (::inet_pton(AF_INET, at.host.c_str(), &addr.sin_addr) == 1) return addr;
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(at.host.c_str(), nullptr, &hints, &res) != 0 || res == nullptr) {
    throw IoError("cannot resolve host '" + at.host + "'");
  }
  addr.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
  ::freeaddrinfo(res);
  return addr;
}

void ignore_sigpipe() {
  static const bool once = [] {
    std::signal(SIGPIPE, SIG_IGN);
    return true;
  }();
  (void)once;
}

}  // namespace

// ---------------------------------------------------------------------------
// Socket

Socket::~Socket() { close(); }

Socket::Socket(Socket&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }

Socket& Socket::operator=(Socket&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = other.fd_;
    other.fd_ = -1;
  }
  return *this;
}

void Socket::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

Endpoint parse_endpoint(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos) throw ValidationError("address must be host:port");
  Endpoint e;
  if (colon > 0) e.host = text.substr(0, colon);
  const std::string port = text.substr(colon + 1);
  if (port.empty() || port.size() > 5 ||
      port.find_first_not_of("0123456789") != std::string::npos) {
    throw ValidationError("bad port in '" + text + "'");
  }
  const unsigned long p = std::stoul(port);
  if (p > 65535) throw ValidationError("bad port in '" + text + "'");
  e.port = static_cast<std::uint16_t>(p);
  return e;
}

// ---------------------------------------------------------------------------
// Frames

void write_frame(int fd, const Json& msg) {
  ignore_sigpipe();
  const std::string body = msg.dump();
  if (body.size() > kMaxFrameBytes) throw ValidationError("frame too large to send");
  const auto len = static_cast<std::uint32_t>(body.size());
  std::string buf(4 + body.size(), '\0');
  buf[0] = static_cast<char>((len >> 24) & 0xff);
  buf[1] = static_cast<char>((len >> 16) & 0xff);
  buf[2] = static_cast<char>((len >> 8) & 0xff);
  buf[3] = static_cast<char>(len & 0xff);
  std::memcpy(buf.data() + 4, body.data(), body.size());
  std::size_t sent = 0;
  while (sent < buf.size()) {
    const ssize_t n = ::send(fd, buf.data() + sent, buf.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw IoError(sys_error("send failed"));
    }
    sent += static_cast<std::size_t>(n);
  }
}

Json read_frame(int fd, const std::string& peer, int timeout_ms, std::uint32_t max_bytes) {
  unsigned char head[4];
  read_exact(fd, reinterpret_cast<char*>(head), 4, peer, timeout_ms);
  const std::uint32_t len = (std::uint32_t{head[0]} << 24) | (std::uint32_t{head[1]} << 16) |
                            (std::uint32_t{head[2]} << 8) | std::uint32_t{head[3]};
  if (len == 0 || len > max_bytes) {
    throw ProtocolViolation(peer, "malformed length prefix " + std::to_string(len));
  }
  std::string body(len, '\0');
  read_exact(fd, body.data(), len, peer, timeout_ms);
  Json msg;
  try {
    msg = Json::parse(body);
  } catch (const Json::parse_error&) {
    throw ProtocolViolation(peer, "frame is not valid JSON");
  }
  if (!msg.is_object()) throw ProtocolViolation(peer, "frame is not a JSON object");
  return msg;
}

// ---------------------------------------------------------------------------
// Connections

Listener Listener::bind(const Endpoint& at) {
  ignore_sigpipe();
  Listener l;
  l.sock_ = Socket(::socket(AF_INET, SOCK_STREAM, 0));
  if (!l.sock_.valid()) throw IoError(sys_error("socket"));
  const int one = 1;
  ::setsockopt(l.sock_.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr = resolve(at);
  if (::bind(l.sock_.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    throw IoError(sys_error("bind " + at.host + ":" + std::to_string(at.port)));
  }
  if (::listen(l.sock_.fd(), 1) != 0) throw IoError(sys_error("listen"));
  socklen_t alen = sizeof addr;
  ::getsockname(l.sock_.fd(), reinterpret_cast<sockaddr*>(&addr), &alen);
  l.port_ = ntohs(addr.sin_port);
  return l;
}

Socket Listener::accept(int timeout_ms) {
  if (timeout_ms >= 0 && !wait_readable(sock_.fd(), timeout_ms)) {
    throw IoError("no prover connected within " + std::to_string(timeout_ms) + " ms");
  }
  for (;;) {
    const int fd = ::accept(sock_.fd(), nullptr, nullptr);
    if (fd >= 0) {
      const int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
      return Socket(fd);
    }
    if (errno != EINTR) throw IoError(sys_error("accept"));
  }
}

Socket connect_to(const Endpoint& at, int timeout_ms) {
  ignore_sigpipe();
  const sockaddr_in addr = resolve(at);
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
  for (;;) {
    Socket s(::socket(AF_INET, SOCK_STREAM, 0));
    if (!s.valid()) throw IoError(sys_error("socket"));
    if (::connect(s.fd(), reinterpret_cast<const sockaddr*>(&addr), sizeof addr) == 0) {
      const int one = 1;
      ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
      return s;
    }
    if (std::chrono::steady_clock::now() >= deadline) {
      throw IoError(sys_error("connect " + at.host + ":" + std::to_string(at.port)));
    }
    ::usleep(20000);
  }
}

// ---------------------------------------------------------------------------
// Sessions

std::optional<protocol::Message> RemoteProver::respond(const protocol::Message& msg, Rng& rng) {
  (void)rng;
  try {
    write_frame(fd_, msg);
  } catch (const IoError& e) {
    throw ProtocolViolation("prover", e.what());
  }
  if (msg.value("type", "") == "verdict") return std::nullopt;
  return read_frame(fd_, "prover", timeout_ms_);
}

harness::RunSummary serve_session(Socket& conn, const harness::RunConfig& config,
                                  int timeout_ms) {
  config.validate();
  if (config.device_mode()) throw ValidationError("device replay does not run over the network");
  Json hello;
  hello["type"] = "session";
  hello["protocol"] = protocol::to_string(config.protocol);
  hello["seed"] = config.seed;
  hello["trials"] = config.trials;
  write_frame(conn.fd(), hello);
  const Json ready = read_frame(conn.fd(), "prover", timeout_ms);
  if (ready.value("type", "") != "ready") {
    throw ProtocolViolation("prover", "expected 'ready' after session open");
  }
  if (ready.value("protocol", "") != protocol::to_string(config.protocol)) {
    throw ValidationError("prover speaks " + ready.value("protocol", std::string("?")) +
                          ", verifier runs " + protocol::to_string(config.protocol));
  }

  std::optional<harness::TranscriptWriter> writer;
  if (!config.output_path.empty()) writer.emplace(config.output_path);
  harness::SummaryBuilder summary(config.protocol);
  RemoteProver remote(conn.fd(), config.protocol, timeout_ms);
  for (std::uint64_t t = 0; t < config.trials; ++t) {
    Json start;
    start["type"] = "trial";
    start["index"] = t;
    write_frame(conn.fd(), start);
    const harness::TrialRecord rec = harness::run_trial(config, t, &remote);
    summary.add(rec);
    if (writer) writer->write(rec.json);
    if (rec.violation) {
      conn.close();
      if (writer) writer->close();
      return summary.finish();
    }
  }
  Json end;
  end["type"] = "end";
  write_frame(conn.fd(), end);
  if (writer) writer->close();
  return summary.finish();
}

std::uint64_t run_prover_session(Socket& conn, provers::ProverKind kind, int timeout_ms) {
  const Json hello = read_frame(conn.fd(), "verifier", timeout_ms);
  if (hello.value("type", "") != "session") {
    throw ProtocolViolation("verifier", "expected 'session' to open");
  }
  const protocol::ProtocolId id = protocol::protocol_from_string(require_string(hello, "protocol"));
  const Json& seed_j = require(hello, "seed");
  if (!seed_j.is_number_unsigned()) throw ProtocolViolation("verifier", "bad seed");
  const std::uint64_t seed = seed_j.get<std::uint64_t>();
  Json ready;
  ready["type"] = "ready";
  ready["protocol"] = protocol::to_string(id);
  ready["prover"] = provers::to_string(kind);
  write_frame(conn.fd(), ready);

  std::unique_ptr<protocol::Prover> prover;
  Rng rng(0);
  std::uint64_t served = 0;
  for (;;) {
    const Json msg = read_frame(conn.fd(), "verifier", timeout_ms);
    const std::string type = msg.value("type", "");
    if (type == "end") break;
    if (type == "trial") {
      const Json& idx = require(msg, "index");
      if (!idx.is_number_unsigned()) throw ProtocolViolation("verifier", "bad trial index");
      prover = provers::make_prover(id, kind);
      rng = Rng::stream(seed, idx.get<std::uint64_t>(), Rng::Lane::kProver);
      ++served;
      continue;
    }
    if (!prover) throw ProtocolViolation("verifier", "protocol message before 'trial'");
    if (std::optional<protocol::Message> reply = prover->respond(msg, rng)) {
      write_frame(conn.fd(), *reply);
    }
  }
  return served;
}

}  // namespace qkit::net
