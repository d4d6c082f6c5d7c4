// Synthetic benchmark worker: runs the timed measurement loop over a
// generated workload and writes metric events to the harness channel.

#include "benchforge/protocol.hpp"
#include "benchforge/timed_runner.hpp"

#include <CLI11.hpp>

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <fcntl.h>
#include <iostream>
#include <string>
#include <unistd.h>

namespace {

int open_channel() {
  const char* target = std::getenv(benchforge::kMetricsFdEnv);
  if (!target || !*target) return STDOUT_FILENO;
  char* end = nullptr;
  const long fd = std::strtol(target, &end, 10);
  if (end != target && *end == '\0' && fd >= 0) return static_cast<int>(fd);
  const int opened = ::open(target, O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
  if (opened < 0) {
    throw std::runtime_error(std::string("cannot open metrics channel '") + target +
                             "': " + std::strerror(errno));
  }
  return opened;
}

void write_line(int fd, const std::string& line) {
  std::size_t off = 0;
  while (off < line.size()) {
    const ssize_t n = ::write(fd, line.data() + off, line.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      return;  // channel gone; the harness will classify the process
    }
    off += static_cast<std::size_t>(n);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"benchforge synthetic workload worker"};

  std::string kind = "constant";
  benchforge::WorkloadSpec spec;
  benchforge::TimerConfig cfg;
  int crash_after = -1;
  std::uint64_t seed = 0;
  std::string task = "train";
  double time_origin = 0.0;

  app.add_option("--kind", kind, "constant|jitter|degrading|crashing|multiworker");
  app.add_option("--batch", spec.batch_size, "units of work per batch");
  app.add_option("--rate", spec.base_rate, "nominal units of work per second");
  app.add_option("--obs-min", cfg.obs_min);
  app.add_option("--obs-max", cfg.obs_max);
  app.add_option("--epochs-max", cfg.epochs_max);
  app.add_option("--epoch-length", cfg.epoch_length, "batches per epoch");
  app.add_option("--jitter", spec.jitter_frac, "uniform +/- fraction of batch time");
  app.add_option("--slowdown", spec.slowdown, "per-batch slowdown for degrading workloads");
  app.add_option("--crash-after", crash_after, "batch index at which a crashing workload fails");
  app.add_option("--workers", spec.workers);
  app.add_option("--units", spec.units);
  app.add_option("--task", task);
  app.add_option("--seed", seed);
  app.add_option("--time-origin", time_origin, "timestamp of the first event");

  CLI11_PARSE(app, argc, argv);

  const auto parsed = benchforge::parse_workload_kind(kind);
  if (!parsed) {
    std::cerr << "benchforge-worker: unknown kind '" << kind << "'\n";
    return 1;
  }
  spec.kind = *parsed;
  if (crash_after >= 0) spec.crash_after = crash_after;

  try {
    const int fd = open_channel();
    benchforge::IterateOptions options;
    options.seed = seed;
    options.task = task;
    options.time_origin = time_origin;
    options.sink = [fd](const benchforge::MetricEvent& e) { write_line(fd, benchforge::encode_event(e)); };

    const auto log = benchforge::timed_iterate(spec, cfg, options);
    if (log.terminal == benchforge::Terminal::Success) return 0;
    std::cerr << "benchforge-worker: " << log.message << "\n";
    const std::string suffix = "insufficient observations";
    const bool short_run = log.message.size() >= suffix.size() &&
                           log.message.compare(log.message.size() - suffix.size(), suffix.size(), suffix) == 0;
    return short_run ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "benchforge-worker: " << e.what() << "\n";
    return 1;
  }
}
