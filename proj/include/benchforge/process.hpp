#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace benchforge {

/// File descriptor number the metric channel is installed on in the child.
inline constexpr int kChildMetricsFd = 3;

struct SpawnRequest {
  std::vector<std::string> argv;
  std::map<std::string, std::string> env;  // layered over the parent environment
  std::filesystem::path cwd;               // empty: inherit
  std::filesystem::path output_path;       // stdout+stderr appended here; empty: inherit
  bool metrics_channel = false;            // open a pipe on kChildMetricsFd
  double timeout_s = 0.0;                  // <= 0: no timeout
};

struct SpawnResult {
  int exit_code = -1;  // 128+signal when killed by a signal; -1 when never started
  bool timed_out = false;
  bool aborted = false;
  bool spawn_failed = false;
  std::string spawn_error;
  double duration_s = 0.0;
};

using ChunkCallback = std::function<void(std::string_view)>;

/// Runs one child in its own process group. Metric bytes are handed to
/// on_metrics as they arrive. When the timeout expires, or should_abort()
/// returns true, the whole group is killed and the remaining bytes drained.
SpawnResult run_process(const SpawnRequest& request, const ChunkCallback& on_metrics = {},
                        const std::function<bool()>& should_abort = {});

/// argv for running a command line through /bin/sh.
std::vector<std::string> shell_argv(const std::string& command);

}  // namespace benchforge
