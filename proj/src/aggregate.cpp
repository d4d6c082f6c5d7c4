#include "benchforge/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace benchforge {

double median(std::vector<double> values) {
  if (values.empty()) throw ScoreError("median of an empty sample");
  const std::size_t n = values.size();
  const std::size_t mid = n / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return lower + (upper - lower) / 2.0;
}

std::optional<double> fold_process(const ObservationLog& log, bool drop_warmup) {
  std::vector<std::string> tasks;
  std::map<std::string, std::vector<double>> rates;
  for (const auto& o : log.observations) {
    if (drop_warmup && o.warmup) continue;
    if (!(o.elapsed > 0.0)) continue;
    if (!rates.count(o.task)) tasks.push_back(o.task);
    rates[o.task].push_back(o.rate());
  }
  if (tasks.empty()) return std::nullopt;
  double total = 0.0;
  for (const auto& t : tasks) total += median(rates[t]);
  return total;
}

BenchResult fold_bench(const BenchmarkSpec& spec, const RunRecord& record, bool drop_warmup) {
  BenchResult r;
  r.bench = spec.name;
  r.weight = spec.weight;
  r.n_processes = static_cast<int>(record.outcomes.size());
  if (record.outcomes.empty()) return r;

  std::vector<double> rates;
  for (const auto& o : record.outcomes) {
    if (o.classified != Classified::Success) continue;
    if (auto rate = fold_process(o.log, drop_warmup)) rates.push_back(*rate);
  }
  r.per_process_rates = rates;

  if (spec.scale == ScaleMode::SingleDevice) {
    if (rates.empty()) return r;
    double sum = 0.0;
    for (double x : rates) sum += x;
    r.perf = sum / static_cast<double>(rates.size());
    r.success_rate = static_cast<double>(rates.size()) / static_cast<double>(r.n_processes);
    return r;
  }

  // Gang: aggregate throughput, no per-device normalization.
  if (rates.size() != record.outcomes.size()) {
    r.per_process_rates.clear();
    return r;
  }
  for (double x : rates) r.perf += x;
  r.success_rate = 1.0;
  return r;
}

SuiteScore suite_score(std::span<const BenchResult> results) {
  SuiteScore s;
  // Terms are summed relative to the first weighted entry, so the result is
  // (1 + x0) * exp(mean(log1p(x) - log1p(x0))).
  std::optional<double> anchor_x;
  double anchor_log = 0.0;
  double sum = 0.0;
  double compensation = 0.0;
  for (const auto& r : results) {
    if (!(r.weight > 0.0)) continue;
    const double ps = std::max(0.0, r.perf) * std::clamp(r.success_rate, 0.0, 1.0);
    const double log_term = std::log1p(ps);
    s.contributions[r.bench] += r.weight * log_term;
    if (!anchor_x) {
      anchor_x = ps;
      anchor_log = log_term;
    }
    const double term = r.weight * (log_term - anchor_log);
    // Neumaier summation.
    const double t = sum + term;
    if (std::abs(sum) >= std::abs(term)) {
      compensation += (sum - t) + term;
    } else {
      compensation += (term - t) + sum;
    }
    sum = t;
    s.total_weight += r.weight;
  }
  if (!(s.total_weight > 0.0)) throw ScoreError("no weighted benchmarks");
  s.score = (1.0 + *anchor_x) * std::exp((sum + compensation) / s.total_weight);
  return s;
}

RatioRow ratio_to_baseline(const BenchResult& candidate, const BenchResult& baseline) {
  if (candidate.bench != baseline.bench) {
    throw ScoreError("ratio between different benchmarks: '" + candidate.bench + "' vs '" +
                     baseline.bench + "'");
  }
  RatioRow row;
  row.bench = candidate.bench;
  row.baseline_perf = baseline.perf;
  row.candidate_perf = candidate.perf;
  const bool baseline_ok = baseline.perf > 0.0 && baseline.success_rate > 0.0;
  const bool candidate_ok = candidate.perf > 0.0 && candidate.success_rate > 0.0;
  if (baseline_ok && candidate_ok) row.ratio = candidate.perf / baseline.perf;
  return row;
}

}  // namespace benchforge
