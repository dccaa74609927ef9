// Copyright 2026 The TinyForge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/stat.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <cstring>

#include "detail/process.hpp"
#include "tinyforge/error.hpp"

namespace tinyforge {

namespace detail {

namespace {

class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  ~Fd() { reset(); }
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  Fd(Fd&& o) noexcept : fd_(o.fd_) { o.fd_ = -1; }
  Fd& operator=(Fd&& o) noexcept {
    if (this != &o) {
      reset();
      fd_ = o.fd_;
      o.fd_ = -1;
    }
    return *this;
  }

  int get() const { return fd_; }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

void make_pipe(Fd& read_end, Fd& write_end) {
  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) != 0) {
    throw Error(ErrorKind::WorkspaceError, std::string("pipe2: ") + std::strerror(errno));
  }
  read_end = Fd(fds[0]);
  write_end = Fd(fds[1]);
}

}  // namespace

std::vector<std::string> scrubbed_environment(const std::filesystem::path& home,
                                              const std::vector<std::string>& whitelist) {
  std::vector<std::string> env;
  const char* path = std::getenv("PATH");
  env.push_back(std::string("PATH=") + (path ? path : "/usr/local/bin:/usr/bin:/bin"));
  bool home_listed = false;
  for (const auto& name : whitelist) {
    if (name == "PATH") continue;
    if (name == "HOME") home_listed = true;
    if (const char* v = std::getenv(name.c_str())) env.push_back(name + "=" + v);
  }
  if (!home_listed) env.push_back("HOME=" + home.string());
  env.push_back("TMPDIR=" + home.string());
  return env;
}

ExecutionOutcome run_process(const std::vector<std::string>& argv, const std::filesystem::path& cwd,
                             const std::vector<std::string>& env, Millis timeout) {
  // Everything the child touches is prepared before fork.
  std::vector<char*> c_argv;
  for (const auto& a : argv) c_argv.push_back(const_cast<char*>(a.c_str()));
  c_argv.push_back(nullptr);
  std::vector<char*> c_env;
  for (const auto& e : env) c_env.push_back(const_cast<char*>(e.c_str()));
  c_env.push_back(nullptr);
  const std::string cwd_str = cwd.string();

  Fd out_r, out_w, err_r, err_w;
  make_pipe(out_r, out_w);
  make_pipe(err_r, err_w);

  const auto started = std::chrono::steady_clock::now();
  const pid_t pid = ::fork();
  if (pid < 0) throw Error(ErrorKind::WorkspaceError, std::string("fork: ") + std::strerror(errno));
  if (pid == 0) {
    ::setpgid(0, 0);
    if (::chdir(cwd_str.c_str()) != 0) ::_exit(126);
    ::dup2(out_w.get(), STDOUT_FILENO);
    ::dup2(err_w.get(), STDERR_FILENO);
    const int devnull = ::open("/dev/null", O_RDONLY);
    if (devnull >= 0) ::dup2(devnull, STDIN_FILENO);
    ::execve(c_argv[0], c_argv.data(), c_env.data());
    ::_exit(127);
  }
  ::setpgid(pid, pid);
  out_w.reset();
  err_w.reset();

  ExecutionOutcome outcome;
  const auto deadline = started + timeout;
  bool killed = false;
  std::chrono::steady_clock::time_point drain_deadline{};

  pollfd fds[2] = {{out_r.get(), POLLIN, 0}, {err_r.get(), POLLIN, 0}};
  std::string* sinks[2] = {&outcome.stdout_text, &outcome.stderr_text};
  int open_count = 2;
  char buf[8192];
  while (open_count > 0) {
    const auto now = std::chrono::steady_clock::now();
    if (!killed && now >= deadline) {
      ::kill(-pid, SIGKILL);
      ::kill(pid, SIGKILL);
      killed = true;
      drain_deadline = now + std::chrono::seconds(1);
    }
    if (killed && now >= drain_deadline) break;  // a descendant escaped the group and holds the pipe
    const auto limit = killed ? drain_deadline : deadline;
    const auto wait_ms = std::chrono::duration_cast<Millis>(limit - now).count();
    const int ready = ::poll(fds, 2, static_cast<int>(std::clamp<long long>(wait_ms, 1, 1000)));
    if (ready < 0) {
      if (errno == EINTR) continue;
      break;
    }
    for (int i = 0; i < 2; ++i) {
      if (fds[i].fd < 0 || fds[i].revents == 0) continue;
      const ssize_t n = ::read(fds[i].fd, buf, sizeof buf);
      if (n > 0) {
        sinks[i]->append(buf, static_cast<std::size_t>(n));
      } else if (n == 0 || (errno != EINTR && errno != EAGAIN)) {
        fds[i].fd = -1;
        --open_count;
      }
    }
  }

  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  outcome.duration = std::chrono::duration_cast<Millis>(std::chrono::steady_clock::now() - started);

  if (killed) {
    outcome.exit_status.reset();
  } else if (WIFEXITED(status)) {
    outcome.exit_status = WEXITSTATUS(status);
  } else if (WIFSIGNALED(status)) {
    outcome.exit_status = 128 + WTERMSIG(status);
  } else {
    outcome.exit_status = -1;
  }
  outcome.succeeded = outcome.exit_status.has_value() && *outcome.exit_status == 0;
  return outcome;
}

}  // namespace detail

std::optional<std::filesystem::path> find_program(std::string_view name) {
  namespace fs = std::filesystem;
  if (name.empty()) return std::nullopt;
  auto executable = [](const fs::path& p) {
    std::error_code ec;
    return fs::is_regular_file(p, ec) && ::access(p.c_str(), X_OK) == 0;
  };
  if (name.find('/') != std::string_view::npos) {
    fs::path p(name);
    if (executable(p)) return fs::absolute(p);
    return std::nullopt;
  }
  const char* path = std::getenv("PATH");
  std::string_view dirs = path ? path : "/usr/local/bin:/usr/bin:/bin";
  while (true) {
    const auto colon = dirs.find(':');
    const auto dir = dirs.substr(0, colon);
    if (!dir.empty()) {
      fs::path candidate = fs::path(dir) / name;
      if (executable(candidate)) return candidate;
    }
    if (colon == std::string_view::npos) break;
    dirs.remove_prefix(colon + 1);
  }
  return std::nullopt;
}

ExecutionOutcome execute_script(const ExecutionSpec& spec, const ScriptRunner& runner) {
  namespace fs = std::filesystem;
  if (spec.kind != ExecutionKind::InterpreterScript) {
    throw Error(ErrorKind::PreconditionFailed, "execute_script needs an InterpreterScript spec");
  }
  if (spec.timeout <= Millis::zero()) throw Error(ErrorKind::PreconditionFailed, "timeout must be positive");
  std::error_code ec;
  if (!fs::is_directory(spec.workspace, ec)) {
    throw Error(ErrorKind::PreconditionFailed, "workspace does not exist: " + spec.workspace.string());
  }
  const fs::path script =
      spec.code_or_binary_path.is_absolute() ? spec.code_or_binary_path : spec.workspace / spec.code_or_binary_path;
  if (!fs::is_regular_file(script, ec)) {
    throw Error(ErrorKind::PreconditionFailed, "script does not exist: " + script.string());
  }
  const auto interpreter = find_program(runner.interpreter);
  if (!interpreter) throw Error(ErrorKind::InterpreterNotFound, runner.interpreter);

  // Relative script path keeps diagnostics free of workspace-specific prefixes.
  fs::path arg = script.lexically_relative(spec.workspace);
  if (arg.empty() || arg.string().starts_with("..")) arg = script;

  return detail::run_process({interpreter->string(), arg.string()}, spec.workspace,
                             detail::scrubbed_environment(spec.workspace, runner.env_whitelist), spec.timeout);
}

namespace {

std::string tail_utf8(const std::string& text, std::size_t max_chars) {
  if (text.size() <= max_chars) return text;
  std::size_t start = text.size() - max_chars;
  // Do not start inside a multi-byte sequence.
  while (start < text.size() && (static_cast<unsigned char>(text[start]) & 0xC0) == 0x80) ++start;
  return text.substr(start);
}

bool blank(const std::string& s) {
  return s.find_first_not_of(" \t\r\n") == std::string::npos;
}

std::string format_seconds(Millis d) {
  if (d.count() % 1000 == 0) return std::to_string(d.count() / 1000);
  std::string s = std::to_string(d.count() / 1000) + "." + std::to_string(1000 + d.count() % 1000).substr(1);
  while (s.back() == '0') s.pop_back();
  return s;
}

}  // namespace

ErrorExcerpt summarize_error(const ExecutionOutcome& outcome, Millis timeout) {
  if (outcome.succeeded) throw Error(ErrorKind::NotAFailure, "outcome succeeded");
  if (outcome.timed_out()) {
    return {"execution exceeded " + format_seconds(timeout) + " s timeout", ExcerptOrigin::Timeout};
  }
  if (!blank(outcome.stderr_text)) return {tail_utf8(outcome.stderr_text, kMaxExcerptChars), ExcerptOrigin::Stderr};
  if (!blank(outcome.stdout_text)) return {tail_utf8(outcome.stdout_text, kMaxExcerptChars), ExcerptOrigin::Stdout};
  return {"process exited with status " + std::to_string(*outcome.exit_status) + ", no diagnostic output",
          ExcerptOrigin::ExitOnly};
}

}  // namespace tinyforge
