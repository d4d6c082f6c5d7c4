#include "benchforge/timed_runner.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <thread>

namespace benchforge {

namespace {

using nlohmann::json;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct StopProgram {};

class Emitter {
 public:
  Emitter(const EventSink& sink, std::vector<MetricEvent>& log) : sink_(sink), log_(log) {}

  void operator()(const MetricEvent& e) const {
    log_.push_back(e);
    if (sink_) sink_(e);
  }

  void emit(EventKind kind, double time, const std::string& task, json data = json::object()) const {
    (*this)(MetricEvent{kind, time, task, std::move(data)});
  }

 private:
  const EventSink& sink_;
  std::vector<MetricEvent>& log_;
};

}  // namespace

std::string_view to_string(WorkloadKind kind) {
  switch (kind) {
    case WorkloadKind::Constant:
      return "constant";
    case WorkloadKind::Jitter:
      return "jitter";
    case WorkloadKind::Degrading:
      return "degrading";
    case WorkloadKind::Crashing:
      return "crashing";
    case WorkloadKind::Multiworker:
      return "multiworker";
  }
  return "unknown";
}

std::optional<WorkloadKind> parse_workload_kind(std::string_view text) {
  for (auto k : {WorkloadKind::Constant, WorkloadKind::Jitter, WorkloadKind::Degrading,
                 WorkloadKind::Crashing, WorkloadKind::Multiworker}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

std::string_view to_string(Terminal t) {
  switch (t) {
    case Terminal::Success:
      return "success";
    case Terminal::Error:
      return "error";
    case Terminal::Timeout:
      return "timeout";
  }
  return "unknown";
}

void validate_workload(const WorkloadSpec& spec, const TimerConfig& cfg) {
  if (spec.batch_size <= 0) throw std::invalid_argument("batch_size must be positive");
  if (!(spec.base_rate > 0.0) || !std::isfinite(spec.base_rate)) {
    throw std::invalid_argument("base_rate must be positive");
  }
  if (!(spec.jitter_frac >= 0.0 && spec.jitter_frac < 1.0)) {
    throw std::invalid_argument("jitter_frac must be in [0, 1)");
  }
  if (!(spec.slowdown >= 0.0)) throw std::invalid_argument("slowdown must be >= 0");
  if (spec.workers <= 0) throw std::invalid_argument("workers must be positive");
  if (spec.kind == WorkloadKind::Crashing && !spec.crash_after) {
    throw std::invalid_argument("crashing workload needs crash_after");
  }
  if (spec.crash_after && (*spec.crash_after < 0 || *spec.crash_after >= cfg.obs_max)) {
    throw std::invalid_argument("crash_after must be in [0, obs_max)");
  }
  if (cfg.obs_min <= 0 || cfg.obs_max <= 0 || cfg.obs_min > cfg.obs_max) {
    throw std::invalid_argument("need 0 < obs_min <= obs_max");
  }
  if (cfg.epochs_max <= 0 || cfg.epoch_length <= 0) {
    throw std::invalid_argument("epochs_max and epoch_length must be positive");
  }
}

std::vector<std::pair<std::string, std::size_t>> ObservationLog::counts_by_task() const {
  std::vector<std::pair<std::string, std::size_t>> counts;
  for (const auto& o : observations) {
    auto it = std::find_if(counts.begin(), counts.end(),
                           [&](const auto& c) { return c.first == o.task; });
    if (it == counts.end()) {
      counts.emplace_back(o.task, 1);
    } else {
      ++it->second;
    }
  }
  return counts;
}

FlushResult flush_epoch(EpochBuffer& buf, const FlushContext& ctx, const EventSink& sink) {
  FlushResult result;
  bool first = ctx.first_is_warmup;
  for (const auto& p : buf.pending) {
    const double elapsed = p.end - p.start;
    if (!(elapsed > 0.0) || !(p.work > 0.0)) {
      ++result.faults;
      continue;
    }
    Observation obs{p.work, elapsed, p.loss, first, ctx.task};
    first = false;
    if (sink) {
      if (obs.loss) {
        sink(MetricEvent{EventKind::Loss, ctx.emit_time, ctx.task, json{{"loss", *obs.loss}}});
      }
      json extra = json::object();
      if (obs.warmup) extra["warmup"] = true;
      sink(make_rate_event(ctx.emit_time, ctx.task, obs.work, obs.elapsed, ctx.units,
                           std::move(extra)));
    }
    result.observations.push_back(std::move(obs));
  }
  buf.pending.clear();
  return result;
}

SyntheticWorkload::SyntheticWorkload(WorkloadSpec spec, std::uint64_t seed, int worker_index)
    : spec_(std::move(spec)),
      rng_(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(worker_index) + 1))) {}

double SyntheticWorkload::uniform_symmetric(double half_width) {
  const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;  // [0, 1)
  return (2.0 * u - 1.0) * half_width;
}

SyntheticWorkload::Batch SyntheticWorkload::next() {
  const int index = started_++;
  if (spec_.crash_after && index == *spec_.crash_after) {
    throw WorkloadCrash("synthetic crash at batch " + std::to_string(index));
  }
  const double work = static_cast<double>(spec_.batch_size);
  const double nominal = work / spec_.base_rate;
  double elapsed = nominal;
  switch (spec_.kind) {
    case WorkloadKind::Constant:
    case WorkloadKind::Crashing:
      break;
    case WorkloadKind::Jitter:
    case WorkloadKind::Multiworker:
      if (spec_.jitter_frac > 0.0) elapsed = nominal * (1.0 + uniform_symmetric(spec_.jitter_frac));
      break;
    case WorkloadKind::Degrading:
      elapsed = nominal * (1.0 + spec_.slowdown * index);
      if (spec_.jitter_frac > 0.0) elapsed *= 1.0 + uniform_symmetric(spec_.jitter_frac);
      break;
  }
  return Batch{work, elapsed, 2.5 * std::exp(-0.02 * index)};
}

SyntheticWorkload synthetic_workload(const WorkloadSpec& spec, std::uint64_t seed) {
  return SyntheticWorkload(spec, seed, 0);
}

ObservationLog time_worker(SyntheticWorkload& workload, const TimerConfig& cfg,
                           const std::string& task, double time_origin, const EventSink& sink) {
  ObservationLog log;
  log.process_id = task;
  Emitter emit(sink, log.raw_events);
  const auto& spec = workload.spec();
  double now = time_origin;

  emit.emit(EventKind::Config, now, task,
            json{{"kind", std::string(to_string(spec.kind))},
                 {"batch", spec.batch_size},
                 {"rate", spec.base_rate},
                 {"obs_min", cfg.obs_min},
                 {"obs_max", cfg.obs_max},
                 {"epoch_length", cfg.epoch_length}});
  emit.emit(EventKind::Start, now, task);

  FlushContext ctx{task, spec.units, now, true};
  std::size_t total_obs = 0;
  auto flush = [&](EpochBuffer& buf, int epoch) {
    ctx.emit_time = now;
    emit.emit(EventKind::Phase, now, task, json{{"name", "flush"}, {"epoch", epoch}});
    auto result = flush_epoch(buf, ctx, emit);
    if (!result.observations.empty()) ctx.first_is_warmup = false;
    log.measurement_faults += result.faults;
    total_obs += result.observations.size();
    for (auto& o : result.observations) log.observations.push_back(std::move(o));
  };

  try {
    for (int epoch = 0; epoch < cfg.epochs_max; ++epoch) {
      emit.emit(EventKind::Phase, now, task, json{{"name", "epoch"}, {"epoch", epoch}});
      EpochBuffer events;
      double start = now;
      try {
        for (int b = 0; b < cfg.epoch_length; ++b) {
          const auto batch = workload.next();
          now += batch.elapsed;
          const double end = now;
          events.record(start, end, batch.work, batch.loss);
          if (!cfg.defer_flush) flush(events, epoch);
          if (events.size() + total_obs >= static_cast<std::size_t>(cfg.obs_max)) break;
          start = end;
        }
      } catch (const WorkloadCrash&) {
        flush(events, epoch);
        throw;
      }
      flush(events, epoch);
      if (total_obs >= static_cast<std::size_t>(cfg.obs_max)) throw StopProgram{};
    }
    if (total_obs < static_cast<std::size_t>(cfg.obs_min)) {
      log.terminal = Terminal::Error;
      log.message = "insufficient observations";
    } else {
      log.terminal = Terminal::Success;
    }
  } catch (const StopProgram&) {
    emit.emit(EventKind::Stop, now, task, json{{"observations", total_obs}});
    log.terminal = Terminal::Success;
  } catch (const WorkloadCrash& crash) {
    log.terminal = Terminal::Error;
    log.message = crash.what();
  }

  if (log.terminal == Terminal::Success) {
    emit.emit(EventKind::Success, now, task, json{{"observations", total_obs}});
  } else {
    emit.emit(EventKind::Error, now, task,
              json{{"message", log.message}, {"observations", total_obs}});
  }
  emit.emit(EventKind::End, now, task);
  return log;
}

ObservationLog timed_iterate(const WorkloadSpec& spec, const TimerConfig& cfg,
                             const IterateOptions& options) {
  validate_workload(spec, cfg);
  if (spec.kind != WorkloadKind::Multiworker || spec.workers == 1) {
    auto workload = SyntheticWorkload(spec, options.seed, 0);
    auto task = spec.kind == WorkloadKind::Multiworker ? options.task + "-0" : options.task;
    auto log = time_worker(workload, cfg, task, options.time_origin, options.sink);
    log.process_id = options.task;
    return log;
  }

  std::mutex sink_mutex;
  EventSink shared;
  if (options.sink) {
    shared = [&](const MetricEvent& e) {
      std::lock_guard lock(sink_mutex);
      options.sink(e);
    };
  }
  std::vector<ObservationLog> logs(static_cast<std::size_t>(spec.workers));
  {
    std::vector<std::jthread> threads;
    for (int w = 0; w < spec.workers; ++w) {
      threads.emplace_back([&, w] {
        SyntheticWorkload workload(spec, options.seed, w);
        logs[static_cast<std::size_t>(w)] =
            time_worker(workload, cfg, options.task + "-" + std::to_string(w),
                        options.time_origin, shared);
      });
    }
  }

  ObservationLog merged;
  merged.process_id = options.task;
  merged.terminal = Terminal::Success;
  for (auto& l : logs) {
    if (l.terminal != Terminal::Success) {
      merged.terminal = l.terminal;
      if (merged.message.empty()) merged.message = l.process_id + ": " + l.message;
    }
    merged.measurement_faults += l.measurement_faults;
    for (auto& o : l.observations) merged.observations.push_back(std::move(o));
    for (auto& e : l.raw_events) merged.raw_events.push_back(std::move(e));
  }
  return merged;
}

}  // namespace benchforge
