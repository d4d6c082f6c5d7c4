#pragma once

#include "benchforge/protocol.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace benchforge {

struct TimerConfig {
  int obs_min = 30;
  int obs_max = 60;
  int epochs_max = 100;
  int epoch_length = 25;  // batches per epoch
  // When false every observation is logged right after its batch. Only
  // useful to show what the deferred-logging checks catch.
  bool defer_flush = true;
};

enum class WorkloadKind { Constant, Jitter, Degrading, Crashing, Multiworker };

std::string_view to_string(WorkloadKind kind);
std::optional<WorkloadKind> parse_workload_kind(std::string_view text);

struct WorkloadSpec {
  WorkloadKind kind = WorkloadKind::Constant;
  int batch_size = 32;
  double base_rate = 64.0;   // units of work per second
  double jitter_frac = 0.0;  // uniform +/- fraction of the per-batch time
  double slowdown = 0.01;    // degrading: per-batch fractional increase
  std::optional<int> crash_after;
  int workers = 1;
  std::string units = "items";
};

/// Throws std::invalid_argument when spec or cfg break their invariants.
void validate_workload(const WorkloadSpec& spec, const TimerConfig& cfg);

/// One timed unit of work. The rate is always derived, never stored.
struct Observation {
  double work = 0.0;
  double elapsed = 0.0;
  std::optional<double> loss;
  bool warmup = false;
  std::string task;

  double rate() const { return work / elapsed; }

  bool operator==(const Observation&) const = default;
};

enum class Terminal { Success, Error, Timeout };

std::string_view to_string(Terminal t);

struct ObservationLog {
  std::string process_id;
  std::vector<Observation> observations;
  Terminal terminal = Terminal::Error;
  std::string message;
  int measurement_faults = 0;
  std::vector<MetricEvent> raw_events;

  /// Observations per distinct task, in first-seen order.
  std::vector<std::pair<std::string, std::size_t>> counts_by_task() const;
};

/// Timestamp pairs captured in the hot loop, resolved only at flush.
struct EpochBuffer {
  struct Pending {
    double start = 0.0;
    double end = 0.0;
    double work = 0.0;
    std::optional<double> loss;
  };

  std::vector<Pending> pending;

  void record(double start, double end, double work, std::optional<double> loss) {
    pending.push_back({start, end, work, loss});
  }
  std::size_t size() const { return pending.size(); }
  bool empty() const { return pending.empty(); }
};

using EventSink = std::function<void(const MetricEvent&)>;

struct FlushContext {
  std::string task = "train";
  std::string units = "items";
  double emit_time = 0.0;
  // Flag the first resolved observation as warmup.
  bool first_is_warmup = false;
};

struct FlushResult {
  std::vector<Observation> observations;
  int faults = 0;  // tuples dropped because end < start
};

/// Resolves every pending tuple in order, emits one `loss` (when present)
/// and one `rate` line per observation, and empties the buffer. A tuple
/// whose end precedes its start is dropped and counted as a fault; a
/// zero-length interval is dropped the same way since no rate exists.
FlushResult flush_epoch(EpochBuffer& buf, const FlushContext& ctx, const EventSink& sink);

class WorkloadCrash : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Deterministic batch generator standing in for a training step.
class SyntheticWorkload {
 public:
  struct Batch {
    double work = 0.0;
    double elapsed = 0.0;
    double loss = 0.0;
  };

  SyntheticWorkload(WorkloadSpec spec, std::uint64_t seed, int worker_index = 0);

  /// Produces the next batch. Throws WorkloadCrash when the crash point is reached.
  Batch next();

  int batches_started() const { return started_; }
  const WorkloadSpec& spec() const { return spec_; }

 private:
  double uniform_symmetric(double half_width);

  WorkloadSpec spec_;
  std::mt19937_64 rng_;
  int started_ = 0;
};

SyntheticWorkload synthetic_workload(const WorkloadSpec& spec, std::uint64_t seed);

struct IterateOptions {
  std::uint64_t seed = 0;
  std::string task = "train";
  double time_origin = 0.0;
  EventSink sink;  // may be empty
};

/// Runs the measurement loop of one worker over an existing workload.
ObservationLog time_worker(SyntheticWorkload& workload, const TimerConfig& cfg,
                           const std::string& task, double time_origin, const EventSink& sink);

/// Full measurement run. Multiworker specs run `workers` concurrent
/// timing loops with task ids `<task>-<index>` sharing one sink; the
/// returned log concatenates their observations in worker order.
ObservationLog timed_iterate(const WorkloadSpec& spec, const TimerConfig& cfg,
                             const IterateOptions& options = {});

}  // namespace benchforge
