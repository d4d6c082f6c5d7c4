#pragma once

#include "benchforge/executor.hpp"
#include "benchforge/suite_config.hpp"
#include "benchforge/timed_runner.hpp"

#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace benchforge {

class ScoreError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BenchResult {
  std::string bench;
  double weight = 1.0;
  double perf = 0.0;          // units of work per second; 0 when nothing succeeded
  double success_rate = 0.0;  // in [0, 1]
  int n_processes = 0;
  std::vector<double> per_process_rates;  // folded rates of successful processes

  bool operator==(const BenchResult&) const = default;
};

struct SuiteScore {
  double score = 0.0;
  std::map<std::string, double> contributions;  // w * log1p(p * s)
  double total_weight = 0.0;
};

struct RatioRow {
  std::string bench;
  double baseline_perf = 0.0;
  double candidate_perf = 0.0;
  std::optional<double> ratio;
};

/// Median of a non-empty sample; even counts average the middle pair.
double median(std::vector<double> values);

/// Per-process rate: median of observation rates, warmup-flagged
/// observations dropped when asked. Observations from several tasks of one
/// process are folded per task and summed (concurrent workers add up).
std::optional<double> fold_process(const ObservationLog& log, bool drop_warmup = true);

/// single-device: mean over successful processes, s = successes / planned.
/// Gang scales: sum of per-rank rates when the gang succeeded, else 0.
BenchResult fold_bench(const BenchmarkSpec& spec, const RunRecord& record, bool drop_warmup = true);

/// Global score exp(sum w*log1p(p*s) / sum w), accumulated in the log
/// domain. Weight-0 entries are skipped; throws ScoreError when no weight is left.
SuiteScore suite_score(std::span<const BenchResult> results);

RatioRow ratio_to_baseline(const BenchResult& candidate, const BenchResult& baseline);

}  // namespace benchforge
