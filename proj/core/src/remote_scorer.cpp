#include "scramblekit/remote_scorer.hpp"

#include <cerrno>
#include <csignal>
#include <cstring>
#include <unordered_map>

#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <spawn.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

extern char** environ;

namespace scramblekit {
namespace {

using Clock = std::chrono::steady_clock;

void set_nonblocking(int fd) {
  int flags = ::fcntl(fd, F_GETFL, 0);
  ::fcntl(fd, F_SETFL, flags | O_NONBLOCK);
}

void ignore_sigpipe() {
  // A scorer that dies mid-batch must surface as a ProtocolError, not kill
  // the host process.
  static const bool done = [] {
    std::signal(SIGPIPE, SIG_IGN);
    return true;
  }();
  (void)done;
}

int remaining_ms(Clock::time_point deadline) {
  auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
  return left <= 0 ? 0 : static_cast<int>(std::min<long long>(left, 1 << 30));
}

std::string sys_error(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

}  // namespace

std::unique_ptr<RemoteScorer> RemoteScorer::spawn(const std::string& command, Options opts) {
  ignore_sigpipe();
  int to_child[2];
  int from_child[2];
  if (::pipe(to_child) != 0) throw Error(Errc::io_error, sys_error("pipe"));
  if (::pipe(from_child) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    throw Error(Errc::io_error, sys_error("pipe"));
  }
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, to_child[0], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, from_child[1], STDOUT_FILENO);
  posix_spawn_file_actions_addclose(&actions, to_child[1]);
  posix_spawn_file_actions_addclose(&actions, from_child[0]);

  std::string shell = "/bin/sh";
  std::string flag = "-c";
  std::string cmd = command;
  char* argv[] = {shell.data(), flag.data(), cmd.data(), nullptr};
  pid_t pid = 0;
  int rc = ::posix_spawn(&pid, "/bin/sh", &actions, nullptr, argv, environ);
  posix_spawn_file_actions_destroy(&actions);
  ::close(to_child[0]);
  ::close(from_child[1]);
  if (rc != 0) {
    ::close(to_child[1]);
    ::close(from_child[0]);
    throw Error(Errc::io_error, "cannot spawn scorer: " + std::string(std::strerror(rc)));
  }
  ::fcntl(to_child[1], F_SETFD, FD_CLOEXEC);
  ::fcntl(from_child[0], F_SETFD, FD_CLOEXEC);
  std::unique_ptr<RemoteScorer> scorer(
      new RemoteScorer(from_child[0], to_child[1], pid, "remote:" + command, opts));
  scorer->handshake();
  return scorer;
}

std::unique_ptr<RemoteScorer> RemoteScorer::connect(const std::string& host, std::uint16_t port, Options opts) {
  ignore_sigpipe();
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const auto service = std::to_string(port);
  if (int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res); rc != 0)
    throw Error(Errc::io_error, "cannot resolve " + host + ": " + ::gai_strerror(rc));
  int fd = -1;
  for (auto* ai = res; ai; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) throw Error(Errc::io_error, "cannot connect to " + host + ":" + service);
  std::unique_ptr<RemoteScorer> scorer(new RemoteScorer(fd, fd, -1, "remote:" + host + ":" + service, opts));
  scorer->handshake();
  return scorer;
}

RemoteScorer::RemoteScorer(int read_fd, int write_fd, pid_t child, std::string description, Options opts)
    : read_fd_(read_fd), write_fd_(write_fd), child_(child), description_(std::move(description)), opts_(opts) {
  if (opts_.max_in_flight == 0) opts_.max_in_flight = 1;
  set_nonblocking(read_fd_);
  if (write_fd_ != read_fd_) set_nonblocking(write_fd_);
}

RemoteScorer::~RemoteScorer() {
  if (write_fd_ != read_fd_) ::close(write_fd_);
  ::close(read_fd_);
  if (child_ > 0) {
    // Closing stdin asks the child to exit; give it a moment before killing.
    for (int i = 0; i < 100; ++i) {
      if (::waitpid(child_, nullptr, WNOHANG) != 0) return;
      ::usleep(10000);
    }
    ::kill(child_, SIGKILL);
    ::waitpid(child_, nullptr, 0);
  }
}

void RemoteScorer::fail(Errc code, const std::string& what) {
  broken_ = true;
  throw Error(code, description_ + ": " + what);
}

bool RemoteScorer::extract_line(std::string& line) {
  auto nl = inbox_.find('\n');
  if (nl == std::string::npos) return false;
  line.assign(inbox_, 0, nl);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  inbox_.erase(0, nl + 1);
  return true;
}

std::string RemoteScorer::read_line(Clock::time_point deadline) {
  std::string line;
  while (!extract_line(line)) {
    pollfd pfd{read_fd_, POLLIN, 0};
    int rc = ::poll(&pfd, 1, remaining_ms(deadline));
    if (rc < 0 && errno == EINTR) continue;
    if (rc < 0) fail(Errc::io_error, sys_error("poll"));
    if (rc == 0) fail(Errc::timeout, "no response within " + std::to_string(opts_.timeout.count()) + " ms");
    char buf[65536];
    ssize_t n = ::read(read_fd_, buf, sizeof buf);
    if (n < 0 && (errno == EAGAIN || errno == EINTR)) continue;
    if (n <= 0) fail(Errc::protocol_error, "scorer closed the stream");
    inbox_.append(buf, static_cast<std::size_t>(n));
  }
  return line;
}

void RemoteScorer::handshake() {
  auto line = read_line(Clock::now() + opts_.timeout);
  try {
    check_handshake(line);
  } catch (const Error& e) {
    fail(Errc::protocol_error, e.what());
  }
}

ScoreResponse RemoteScorer::score(const ScoreRequest& req) {
  return std::move(score_batch(std::span(&req, 1)).front());
}

std::vector<ScoreResponse> RemoteScorer::score_batch(std::span<const ScoreRequest> reqs) {
  if (broken_) throw Error(Errc::protocol_error, description_ + ": session unusable after an earlier failure");
  std::unordered_map<std::string_view, std::size_t> index;
  for (std::size_t i = 0; i < reqs.size(); ++i) {
    reqs[i].validate();
    if (!index.emplace(reqs[i].id, i).second)
      throw Error(Errc::invalid_argument, "duplicate request id '" + reqs[i].id + "' in batch");
  }

  const auto deadline = Clock::now() + opts_.timeout;
  std::vector<ScoreResponse> out(reqs.size());
  std::vector<bool> done(reqs.size(), false);
  std::size_t sent = 0, received = 0;
  std::string outbox;
  std::size_t out_pos = 0;
  std::string line;

  while (received < reqs.size()) {
    while (outbox.size() == out_pos && sent < reqs.size() && sent - received < opts_.max_in_flight) {
      outbox = encode_request(reqs[sent++]);
      outbox += '\n';
      out_pos = 0;
    }
    const bool want_write = out_pos < outbox.size();

    pollfd fds[2];
    nfds_t nfds = 1;
    fds[0] = {read_fd_, POLLIN, 0};
    if (want_write) {
      if (write_fd_ == read_fd_) {
        fds[0].events |= POLLOUT;
      } else {
        fds[1] = {write_fd_, POLLOUT, 0};
        nfds = 2;
      }
    }
    int rc = ::poll(fds, nfds, remaining_ms(deadline));
    if (rc < 0 && errno == EINTR) continue;
    if (rc < 0) fail(Errc::io_error, sys_error("poll"));
    if (rc == 0)
      fail(Errc::timeout, "batch of " + std::to_string(reqs.size()) + " requests not answered within " +
                              std::to_string(opts_.timeout.count()) + " ms");

    const short write_events = nfds == 2 ? fds[1].revents : fds[0].revents;
    if (want_write && (write_events & (POLLOUT | POLLERR | POLLHUP))) {
      ssize_t n = write_fd_ == read_fd_
                      ? ::send(write_fd_, outbox.data() + out_pos, outbox.size() - out_pos, MSG_NOSIGNAL)
                      : ::write(write_fd_, outbox.data() + out_pos, outbox.size() - out_pos);
      if (n < 0 && errno != EAGAIN && errno != EINTR) fail(Errc::protocol_error, sys_error("write to scorer"));
      if (n > 0) out_pos += static_cast<std::size_t>(n);
    }

    if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
      char buf[65536];
      ssize_t n = ::read(read_fd_, buf, sizeof buf);
      if (n < 0 && errno != EAGAIN && errno != EINTR) fail(Errc::protocol_error, sys_error("read from scorer"));
      if (n == 0) fail(Errc::protocol_error, "scorer closed the stream");
      if (n > 0) inbox_.append(buf, static_cast<std::size_t>(n));
      while (extract_line(line)) {
        ScoreResponse resp;
        try {
          resp = decode_response(line);
        } catch (const Error& e) {
          fail(Errc::protocol_error, e.what());
        }
        auto it = index.find(resp.id);
        if (it == index.end() || it->second >= sent)
          fail(Errc::protocol_error, "response id '" + resp.id + "' matches no outstanding request");
        if (done[it->second]) fail(Errc::protocol_error, "duplicate response for '" + resp.id + "'");
        try {
          check_response(reqs[it->second], resp);
        } catch (const Error& e) {
          fail(Errc::protocol_error, e.what());
        }
        done[it->second] = true;
        out[it->second] = std::move(resp);
        ++received;
      }
    }
  }
  return out;
}

}  // namespace scramblekit
