#pragma once

#include <chrono>
#include <memory>
#include <string>
#include <sys/types.h>

#include "scramblekit/error.hpp"
#include "scramblekit/scorer.hpp"

namespace scramblekit {

/// Client for an external scorer speaking the newline-delimited JSON
/// protocol over a child process's stdio or a TCP stream.
///
/// A batch is pipelined: up to `max_in_flight` requests are written before
/// their responses are read, and responses may arrive in any order. The
/// whole batch must complete within `timeout`. After any protocol error or
/// timeout the session is unusable and further calls throw ProtocolError.
class RemoteScorer final : public Scorer {
 public:
  struct Options {
    std::chrono::milliseconds timeout{30000};
    std::size_t max_in_flight = 64;
  };

  /// Runs `command` through /bin/sh and talks over its stdin/stdout.
  static std::unique_ptr<RemoteScorer> spawn(const std::string& command, Options opts);
  static std::unique_ptr<RemoteScorer> connect(const std::string& host, std::uint16_t port, Options opts);

  ~RemoteScorer() override;
  RemoteScorer(const RemoteScorer&) = delete;
  RemoteScorer& operator=(const RemoteScorer&) = delete;

  ScoreResponse score(const ScoreRequest& req) override;
  std::vector<ScoreResponse> score_batch(std::span<const ScoreRequest> reqs) override;
  std::string describe() const override { return description_; }

 private:
  RemoteScorer(int read_fd, int write_fd, pid_t child, std::string description, Options opts);

  void handshake();
  /// Next complete line, waiting until `deadline`.
  std::string read_line(std::chrono::steady_clock::time_point deadline);
  bool extract_line(std::string& line);
  [[noreturn]] void fail(Errc code, const std::string& what);

  int read_fd_;
  int write_fd_;
  pid_t child_;
  std::string description_;
  Options opts_;
  std::string inbox_;
  bool broken_ = false;
};

}  // namespace scramblekit
