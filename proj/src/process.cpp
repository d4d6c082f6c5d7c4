#include "benchforge/process.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <optional>
#include <utility>
#include <thread>

extern char** environ;

namespace benchforge {

namespace {

using Clock = std::chrono::steady_clock;

class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  Fd(Fd&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  Fd& operator=(Fd&& o) noexcept {
    reset();
    fd_ = std::exchange(o.fd_, -1);
    return *this;
  }
  ~Fd() { reset(); }

  int get() const { return fd_; }
  explicit operator bool() const { return fd_ >= 0; }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

std::pair<Fd, Fd> make_pipe() {
  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) != 0) return {};
  return {Fd(fds[0]), Fd(fds[1])};
}

std::map<std::string, std::string> merged_environment(const std::map<std::string, std::string>& extra) {
  std::map<std::string, std::string> env;
  for (char** e = environ; e && *e; ++e) {
    std::string_view kv(*e);
    const auto eq = kv.find('=');
    if (eq == std::string_view::npos) continue;
    env[std::string(kv.substr(0, eq))] = std::string(kv.substr(eq + 1));
  }
  for (const auto& [k, v] : extra) env[k] = v;
  return env;
}

std::string resolve_executable(const std::string& name, const std::map<std::string, std::string>& env) {
  if (name.find('/') != std::string::npos) return name;
  const auto it = env.find("PATH");
  const std::string path = it != env.end() ? it->second : "/usr/bin:/bin";
  std::size_t start = 0;
  while (start <= path.size()) {
    auto end = path.find(':', start);
    if (end == std::string::npos) end = path.size();
    std::string dir = path.substr(start, end - start);
    if (dir.empty()) dir = ".";
    const std::string candidate = dir + "/" + name;
    if (::access(candidate.c_str(), X_OK) == 0) return candidate;
    start = end + 1;
  }
  return name;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int decode_status(int status) {
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  if (WIFSIGNALED(status)) return 128 + WTERMSIG(status);
  return -1;
}

}  // namespace

std::vector<std::string> shell_argv(const std::string& command) {
  return {"/bin/sh", "-c", command};
}

SpawnResult run_process(const SpawnRequest& request, const ChunkCallback& on_metrics,
                        const std::function<bool()>& should_abort) {
  SpawnResult result;
  const auto t0 = Clock::now();
  if (request.argv.empty()) {
    result.spawn_failed = true;
    result.spawn_error = "empty argv";
    return result;
  }

  auto env_map = request.env;
  if (request.metrics_channel) env_map["BENCHFORGE_METRICS_FD"] = std::to_string(kChildMetricsFd);
  const auto env = merged_environment(env_map);

  // Everything the child touches is prepared before fork.
  std::vector<std::string> env_strings;
  env_strings.reserve(env.size());
  for (const auto& [k, v] : env) env_strings.push_back(k + "=" + v);
  std::vector<char*> envp;
  for (auto& s : env_strings) envp.push_back(s.data());
  envp.push_back(nullptr);

  std::vector<std::string> args = request.argv;
  const std::string exe = resolve_executable(args[0], env);
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);
  const std::string cwd = request.cwd.string();

  Fd devnull(::open("/dev/null", O_RDONLY | O_CLOEXEC));
  Fd output;
  if (!request.output_path.empty()) {
    output = Fd(::open(request.output_path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644));
    if (!output) {
      result.spawn_failed = true;
      result.spawn_error = "cannot open " + request.output_path.string() + ": " + std::strerror(errno);
      return result;
    }
  }
  auto [metrics_read, metrics_write] =
      request.metrics_channel ? make_pipe() : std::pair<Fd, Fd>{};
  if (request.metrics_channel && !metrics_read) {
    result.spawn_failed = true;
    result.spawn_error = std::string("pipe: ") + std::strerror(errno);
    return result;
  }
  auto [err_read, err_write] = make_pipe();

  const pid_t pid = ::fork();
  if (pid < 0) {
    result.spawn_failed = true;
    result.spawn_error = std::string("fork: ") + std::strerror(errno);
    return result;
  }
  if (pid == 0) {
    ::setpgid(0, 0);
    if (devnull) ::dup2(devnull.get(), STDIN_FILENO);
    if (output) {
      ::dup2(output.get(), STDOUT_FILENO);
      ::dup2(output.get(), STDERR_FILENO);
    }
    if (metrics_write) {
      if (metrics_write.get() == kChildMetricsFd) {
        ::fcntl(kChildMetricsFd, F_SETFD, 0);
      } else {
        ::dup2(metrics_write.get(), kChildMetricsFd);
      }
    }
    if (!cwd.empty() && ::chdir(cwd.c_str()) != 0) {
      int err = errno;
      (void)!::write(err_write.get(), &err, sizeof err);
      ::_exit(127);
    }
    ::execve(exe.c_str(), argv.data(), envp.data());
    int err = errno;
    (void)!::write(err_write.get(), &err, sizeof err);
    ::_exit(127);
  }

  ::setpgid(pid, pid);
  metrics_write.reset();
  err_write.reset();

  int child_errno = 0;
  ssize_t n;
  do {
    n = ::read(err_read.get(), &child_errno, sizeof child_errno);
  } while (n < 0 && errno == EINTR);
  if (n == static_cast<ssize_t>(sizeof child_errno)) {
    int status = 0;
    ::waitpid(pid, &status, 0);
    result.spawn_failed = true;
    result.spawn_error = "cannot start '" + request.argv[0] + "': " + std::strerror(child_errno);
    result.duration_s = seconds_since(t0);
    return result;
  }

  const bool has_deadline = request.timeout_s > 0.0;
  const auto deadline =
      t0 + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(request.timeout_s));
  bool exited = false;
  int status = 0;
  bool killed = false;
  std::optional<Clock::time_point> drain_until;

  auto kill_group = [&] {
    if (!killed) {
      ::kill(-pid, SIGKILL);
      ::kill(pid, SIGKILL);
      killed = true;
    }
  };

  char buf[8192];
  while (true) {
    if (!exited) {
      const pid_t w = ::waitpid(pid, &status, WNOHANG);
      if (w == pid) {
        exited = true;
        // Grandchildren may still hold the channel; give them a moment.
        if (metrics_read) drain_until = Clock::now() + std::chrono::milliseconds(500);
      }
    }
    if (!killed && !exited) {
      if (has_deadline && Clock::now() >= deadline) {
        result.timed_out = true;
        kill_group();
      } else if (should_abort && should_abort()) {
        result.aborted = true;
        kill_group();
      }
    }
    if (!metrics_read) {
      if (exited) break;
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
      continue;
    }
    if (drain_until && Clock::now() >= *drain_until) {
      kill_group();
      break;
    }

    pollfd pfd{metrics_read.get(), POLLIN, 0};
    const int ready = ::poll(&pfd, 1, 20);
    if (ready < 0 && errno != EINTR) break;
    if (ready > 0) {
      const ssize_t got = ::read(metrics_read.get(), buf, sizeof buf);
      if (got > 0) {
        if (on_metrics) on_metrics(std::string_view(buf, static_cast<std::size_t>(got)));
      } else if (got == 0) {
        metrics_read.reset();
      } else if (errno != EINTR && errno != EAGAIN) {
        metrics_read.reset();
      }
    }
  }

  if (!exited) {
    while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
  }
  // Reap stragglers left in the group.
  ::kill(-pid, SIGKILL);
  result.exit_code = decode_status(status);
  result.duration_s = seconds_since(t0);
  return result;
}

}  // namespace benchforge
