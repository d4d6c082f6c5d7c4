#include "benchforge/aggregate.hpp"

#include "golden_tables.hpp"
#include "score_props.hpp"

#include "benchforge/report.hpp"

#include <doctest.h>

#include <random>

using namespace benchforge;

namespace {

ProcessOutcome outcome(int rank, std::vector<double> rates, bool ok, std::optional<int> gang = std::nullopt) {
  ProcessOutcome o;
  o.plan.rank = rank;
  o.plan.gang = gang;
  o.classified = ok ? Classified::Success : Classified::Error;
  o.log.terminal = ok ? Terminal::Success : Terminal::Error;
  bool first = true;
  for (double r : rates) {
    o.log.observations.push_back(Observation{r, 1.0, std::nullopt, first, "train"});
    first = false;
  }
  return o;
}

BenchmarkSpec spec_of(ScaleMode scale) {
  BenchmarkSpec s;
  s.name = "b";
  s.scale = scale;
  s.run_cmd = "x";
  return s;
}

RunRecord record_of(std::vector<ProcessOutcome> outcomes) {
  RunRecord r;
  r.bench = "b";
  r.outcomes = std::move(outcomes);
  return r;
}

BenchResult result(std::string name, double w, double p, double s = 1.0) {
  return BenchResult{std::move(name), w, p, s, 1, {}};
}

}  // namespace

TEST_CASE("median") {
  CHECK(median({64, 64, 64}) == 64);
  CHECK(median({10, 1000, 12, 11, 13}) == 12);
  CHECK(median({1, 2, 3, 10}) == 2.5);
  CHECK_THROWS(median({}));
}

TEST_CASE("median of jittered rates matches sort and pick") {
  WorkloadSpec spec;
  spec.kind = WorkloadKind::Jitter;
  spec.jitter_frac = 0.3;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto log = timed_iterate(spec, TimerConfig{}, IterateOptions{.seed = seed});
    std::vector<double> rates;
    for (const auto& o : log.observations) {
      if (!o.warmup) rates.push_back(o.rate());
    }
    std::sort(rates.begin(), rates.end());
    const auto n = rates.size();
    const double expected = n % 2 ? rates[n / 2] : (rates[n / 2 - 1] + rates[n / 2]) / 2;
    CHECK(fold_process(log) == expected);
  }
}

TEST_CASE("process folding drops warmup unless asked") {
  const auto o = outcome(0, {1000, 10, 10, 10}, true);
  CHECK(fold_process(o.log) == 10);
  CHECK(fold_process(o.log, false) == 10);
  const auto two = outcome(0, {1000, 10}, true);
  CHECK(fold_process(two.log) == 10);
  CHECK(fold_process(two.log, false) == 505);
  CHECK_FALSE(fold_process(ObservationLog{}).has_value());
}

TEST_CASE("concurrent tasks of one process add up") {
  ObservationLog log;
  for (int t = 0; t < 3; ++t) {
    for (int i = 0; i < 5; ++i) {
      log.observations.push_back(Observation{50, 1.0, std::nullopt, i == 0, "w-" + std::to_string(t)});
    }
  }
  CHECK(fold_process(log) == 150);
}

TEST_CASE("single-device benches average successful processes") {
  const auto two = fold_bench(spec_of(ScaleMode::SingleDevice),
                              record_of({outcome(0, {100, 100, 100}, true), outcome(1, {200, 200, 200}, true)}));
  CHECK(two.perf == 150);
  CHECK(two.success_rate == 1);

  std::vector<ProcessOutcome> eight;
  for (int i = 0; i < 8; ++i) eight.push_back(outcome(i, {100, 100, 100}, i < 6));
  const auto partial = fold_bench(spec_of(ScaleMode::SingleDevice), record_of(eight));
  CHECK(partial.perf == 100);
  CHECK(partial.success_rate == 0.75);
  CHECK(partial.n_processes == 8);

  std::reverse(eight.begin(), eight.end());
  CHECK(fold_bench(spec_of(ScaleMode::SingleDevice), record_of(eight)).perf == 100);

  const auto none = fold_bench(spec_of(ScaleMode::SingleDevice), record_of({}));
  CHECK(none.success_rate == 0);
  CHECK(none.perf == 0);
}

TEST_CASE("gangs sum their ranks and fail together") {
  std::vector<ProcessOutcome> ranks;
  for (int i = 0; i < 4; ++i) ranks.push_back(outcome(i, {250, 250, 250}, true, 0));
  const auto ok = fold_bench(spec_of(ScaleMode::NodeDevices), record_of(ranks));
  CHECK(ok.perf == 1000);
  CHECK(ok.success_rate == 1);

  ranks[3] = outcome(3, {250}, false, 0);
  const auto broken = fold_bench(spec_of(ScaleMode::MultiNode), record_of(ranks));
  CHECK(broken.perf == 0);
  CHECK(broken.success_rate == 0);
}

TEST_CASE("score examples") {
  CHECK(suite_score(std::vector{result("a", 1, 5)}).score == doctest::Approx(6).epsilon(1e-15));
  CHECK(suite_score(std::vector{result("a", 1, 3), result("b", 1, 8)}).score == doctest::Approx(6).epsilon(1e-14));
  CHECK(suite_score(std::vector{result("a", 1, 3), result("z", 0, 1e9)}).score == 4);
  CHECK_THROWS_AS(suite_score(std::vector{result("a", 0, 3)}), ScoreError);
  CHECK_THROWS_AS(suite_score(std::vector<BenchResult>{}), ScoreError);
  const auto s = suite_score(std::vector{result("a", 2, 3), result("b", 1, 0, 0)});
  CHECK(s.total_weight == 3);
  CHECK(s.contributions.at("a") == doctest::Approx(2 * std::log(4.0)));
  CHECK(s.contributions.at("b") == 0);
}

TEST_CASE("published A100 and H100 scores") {
  for (int col : {0, 1}) {
    std::vector<BenchResult> rs;
    for (const auto& row : golden::kMainResults) {
      rs.push_back(result(std::string(row.bench), golden::main_weight(row.bench), parse_humanized(row.perf[col])));
    }
    const double printed = parse_humanized(golden::kMainGlobal.perf[col]);
    CHECK(suite_score(rs).score == doctest::Approx(printed).epsilon(0.02));
  }
}

TEST_CASE("ratios") {
  const auto r = ratio_to_baseline(result("reformer", 1, 103.7), result("reformer", 1, 62.3));
  REQUIRE(r.ratio);
  CHECK(*r.ratio == doctest::Approx(1.6645).epsilon(1e-4));
  CHECK(*ratio_to_baseline(result("x", 1, 7), result("x", 1, 7)).ratio == 1.0);
  CHECK_FALSE(ratio_to_baseline(result("x", 1, 7, 0), result("x", 1, 7)).ratio);
  CHECK_FALSE(ratio_to_baseline(result("x", 1, 7), result("x", 1, 0)).ratio);
  CHECK_THROWS_AS(ratio_to_baseline(result("x", 1, 7), result("y", 1, 7)), ScoreError);
}

TEST_CASE("score properties") {
  const auto failures = scoreprops::check(200, 77);
  for (const auto& f : failures) MESSAGE(f);
  CHECK(failures.empty());
}
