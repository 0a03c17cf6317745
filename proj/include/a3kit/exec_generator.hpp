#pragma once

// Adapter for external generators (e.g. a fine-tuned seq2seq model behind a
// script). One invocation per focal method:
//
//   stdin   {"focal": <FocalMethod>, "k": <int>}\n
//   stdout  {"candidates": ["<test text>", ...]}\n
//
// A nonzero exit, unparsable output or a timeout is reported per focal
// method; callers carry on with the next one.

#include <a3kit/focal_extract.hpp>
#include <a3kit/generator.hpp>
#include <a3kit/serialize.hpp>

#include <cerrno>
#include <chrono>
#include <csignal>
#include <optional>
#include <utility>
#include <string>
#include <vector>

#include <fcntl.h>
#include <poll.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

namespace a3kit {

struct ProcessResult {
  int exit_code = -1; // -1 when killed or not started
  bool timed_out = false;
  std::string stdout_text;
};

namespace detail {

inline void ignore_sigpipe_once() {
  static const bool done = [] {
    std::signal(SIGPIPE, SIG_IGN);
    return true;
  }();
  (void)done;
}

class Fd {
public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  Fd(Fd&& o) noexcept : fd_(o.release()) {}
  Fd& operator=(Fd&& o) noexcept {
    if (this != &o) {
      reset();
      fd_ = o.release();
    }
    return *this;
  }
  ~Fd() { reset(); }

  [[nodiscard]] int get() const noexcept { return fd_; }
  int release() noexcept { return std::exchange(fd_, -1); }
  void reset() noexcept {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

private:
  int fd_ = -1;
};

} // namespace detail

/// Runs `/bin/sh -c command`, feeds `input` on stdin and collects stdout
/// until EOF or the deadline. The child runs in its own process group, which
/// is killed on timeout.
inline ProcessResult run_process(const std::string& command, std::string_view input,
                                 std::chrono::milliseconds timeout) {
  detail::ignore_sigpipe_once();
  int in_pipe[2];
  int out_pipe[2];
  if (::pipe(in_pipe) != 0) throw Error("subprocess_failed", "pipe() failed");
  if (::pipe(out_pipe) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw Error("subprocess_failed", "pipe() failed");
  }
  detail::Fd child_in(in_pipe[0]), to_child(in_pipe[1]);
  detail::Fd from_child(out_pipe[0]), child_out(out_pipe[1]);

  const pid_t pid = ::fork();
  if (pid < 0) throw Error("subprocess_failed", "fork() failed");
  if (pid == 0) {
    ::setpgid(0, 0);
    ::dup2(child_in.get(), STDIN_FILENO);
    ::dup2(child_out.get(), STDOUT_FILENO);
    ::close(child_in.get());
    ::close(child_out.get());
    ::close(to_child.get());
    ::close(from_child.get());
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::setpgid(pid, pid);
  child_in.reset();
  child_out.reset();
  ::fcntl(to_child.get(), F_SETFL, ::fcntl(to_child.get(), F_GETFL) | O_NONBLOCK);

  ProcessResult result;
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  std::size_t written = 0;
  if (input.empty()) to_child.reset();
  char buf[4096];
  while (from_child.get() >= 0) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      result.timed_out = true;
      break;
    }
    pollfd fds[2];
    nfds_t n = 0;
    fds[n++] = pollfd{from_child.get(), POLLIN, 0};
    if (to_child.get() >= 0) fds[n++] = pollfd{to_child.get(), POLLOUT, 0};
    const int rc = ::poll(fds, n, static_cast<int>(left.count()));
    if (rc < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (rc == 0) continue;
    if (n == 2 && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP)) != 0) {
      const ssize_t w = ::write(to_child.get(), input.data() + written, input.size() - written);
      if (w > 0) written += static_cast<std::size_t>(w);
      if (w < 0 && errno != EAGAIN && errno != EINTR) written = input.size();
      if (written >= input.size()) to_child.reset();
    }
    if ((fds[0].revents & (POLLIN | POLLHUP | POLLERR)) != 0) {
      const ssize_t r = ::read(from_child.get(), buf, sizeof buf);
      if (r > 0) {
        result.stdout_text.append(buf, static_cast<std::size_t>(r));
      } else if (r == 0 || (errno != EINTR && errno != EAGAIN)) {
        from_child.reset();
      }
    }
  }
  to_child.reset();
  from_child.reset();

  if (result.timed_out) ::kill(-pid, SIGKILL);
  int status = 0;
  if (!result.timed_out) {
    // stdout closed; give the child until the deadline to exit.
    for (;;) {
      const pid_t w = ::waitpid(pid, &status, WNOHANG);
      if (w == pid) break;
      if (std::chrono::steady_clock::now() >= deadline) {
        result.timed_out = true;
        ::kill(-pid, SIGKILL);
        break;
      }
      ::usleep(1000);
    }
  }
  if (result.timed_out) {
    ::waitpid(pid, &status, 0);
    return result;
  }
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

struct GenerationOutcome {
  std::string focal_id;
  std::vector<TestCase> candidates;
  std::optional<std::string> error;
};

/// Asks an external generator for up to k candidates for `focal`.
inline GenerationOutcome exec_generator(const std::string& command, const FocalMethod& focal, std::size_t k,
                                        std::chrono::milliseconds timeout) {
  GenerationOutcome out;
  out.focal_id = focal.id;
  const std::string request = json{{"focal", focal}, {"k", k}}.dump() + "\n";
  ProcessResult proc;
  try {
    proc = run_process(command, request, timeout);
  } catch (const Error& e) {
    out.error = e.code() + ": " + e.what();
    return out;
  }
  if (proc.timed_out) {
    out.error = "timeout after " + std::to_string(timeout.count()) + " ms";
    return out;
  }
  if (proc.exit_code != 0) {
    out.error = "generator exited with status " + std::to_string(proc.exit_code);
    return out;
  }
  json response;
  try {
    response = json::parse(proc.stdout_text);
  } catch (const json::exception&) {
    out.error = "malformed JSON response";
    return out;
  }
  const auto it = response.is_object() ? response.find("candidates") : response.end();
  if (it == response.end() || !it->is_array()) {
    out.error = "response lacks a candidates array";
    return out;
  }
  const std::string generator_id = "exec:" + command;
  for (const auto& c : *it) {
    if (out.candidates.size() >= k) break;
    if (!c.is_string()) {
      out.candidates.clear();
      out.error = "non-string candidate in response";
      return out;
    }
    const std::string text = c.get<std::string>();
    if (text.empty()) continue;
    TestCase tc;
    tc.id = test_case_id(focal.id, out.candidates.size() + 1);
    tc.focal_id = focal.id;
    tc.text = text;
    tc.generator_id = generator_id;
    out.candidates.push_back(std::move(tc));
  }
  return out;
}

} // namespace a3kit
