#include "benchforge/design_analysis.hpp"

#include "golden_tables.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace benchforge;

namespace {

BenchmarkSpec tagged(std::string name, double w, std::set<std::string> domains, std::string size = "<100M") {
  BenchmarkSpec b;
  b.name = std::move(name);
  b.weight = w;
  b.run_cmd = "x";
  b.tags.domains = std::move(domains);
  b.tags.model_size_class = std::move(size);
  return b;
}

SuiteConfig suite(std::vector<BenchmarkSpec> benches) {
  SuiteConfig cfg;
  cfg.benchmarks = std::move(benches);
  return cfg;
}

std::vector<std::string> model_type_classes() {
  return {golden::kModelTypeClasses.begin(), golden::kModelTypeClasses.end()};
}

}  // namespace

TEST_CASE("coverage examples") {
  auto r = coverage_proportions(suite({tagged("a", 1, {"NLP"}), tagged("b", 1, {"NLP", "CV"})}));
  CHECK(r.proportions[Dimension::Domains]["NLP"] == 1.0);
  CHECK(r.proportions[Dimension::Domains]["CV"] == 0.5);

  r = coverage_proportions(suite({tagged("dimenet", 2, {"Graphs"}), tagged("a", 1, {"CV"}), tagged("b", 1, {"CV"})}));
  CHECK(r.proportions[Dimension::Domains]["Graphs"] == 0.5);
  CHECK(r.total_weight == 4.0);
}

TEST_CASE("untagged weighted bench is named in the error") {
  auto cfg = suite({tagged("a", 1, {"NLP"}), tagged("bare", 1, {})});
  cfg.benchmarks[1].tags = {};
  try {
    coverage_proportions(cfg);
    FAIL("expected an error");
  } catch (const AnalysisError& e) {
    CHECK(std::string(e.what()).find("bare") != std::string::npos);
  }
  cfg.benchmarks[1].weight = 0;
  CHECK_NOTHROW(coverage_proportions(cfg));
}

TEST_CASE("coverage properties on random suites") {
  std::mt19937_64 rng(12);
  const std::vector<std::string> domains{"CV", "NLP", "RL", "Graphs", "Audio"};
  const std::vector<std::string> sizes{"<100M", "100M-1B", "1B-10B", ">10B"};
  for (int round = 0; round < 200; ++round) {
    SuiteConfig cfg;
    const int n = 1 + static_cast<int>(rng() % 20);
    for (int i = 0; i < n; ++i) {
      std::set<std::string> ds;
      for (const auto& d : domains) {
        if (rng() % 3 == 0) ds.insert(d);
      }
      if (ds.empty()) ds.insert(domains[rng() % domains.size()]);
      cfg.benchmarks.push_back(tagged("b" + std::to_string(i), 0.5 + static_cast<double>(rng() % 4),
                                      ds, sizes[rng() % sizes.size()]));
    }
    cfg.targets = CoverageTargets{};
    for (const auto& d : domains) cfg.targets->by_dimension[Dimension::Domains][d] = 1.0 / domains.size();

    const auto r = coverage_proportions(cfg);

    double total = 0;
    for (const auto& b : cfg.benchmarks) total += b.weight;
    double dev = 0;
    for (const auto& d : domains) {
      double w = 0;
      for (const auto& b : cfg.benchmarks) w += b.tags.domains.count(d) ? b.weight : 0;
      dev += std::abs(w / total - 1.0 / domains.size());
    }
    CHECK(r.deviation.at(Dimension::Domains) == doctest::Approx(dev).epsilon(1e-12));

    double sum = 0;
    for (const auto& [k, v] : r.proportions.at(Dimension::ModelSize)) sum += v;
    CHECK(std::abs(sum - 1.0) <= 1e-9);

    auto scaled = cfg;
    for (auto& b : scaled.benchmarks) b.weight *= 3.7;
    const auto rs = coverage_proportions(scaled);
    for (const auto& [dim, props] : r.proportions) {
      for (const auto& [k, v] : props) CHECK(rs.proportions.at(dim).at(k) == doctest::Approx(v).epsilon(1e-12));
    }
  }
}

TEST_CASE("reference suite coverage against its targets") {
  const auto cfg = load_suite(std::string(BENCHFORGE_CONFIG_DIR) + "/main-suite.yaml");
  const auto r = coverage_proportions(cfg);
  CHECK(r.total_weight == 29.0);
  CHECK(r.proportions.at(Dimension::Domains).at("Graphs") == doctest::Approx(6.0 / 29));
  CHECK(r.deviation.count(Dimension::Domains) == 1);
  CHECK(r.deviation.count(Dimension::Libraries) == 1);
  CHECK(r.deviation.count(Dimension::ModelSize) == 0);
}

TEST_CASE("matrix construction rules") {
  const std::vector<std::string> classes{"A", "B", "C"};
  auto m = mlcm_build({{{"A"}, {"A"}}}, classes);
  CHECK(m.at(0, 0) == 1);
  CHECK(m.total() == 1);

  m = mlcm_build({{{"A"}, {}}}, classes);
  CHECK(m.at(0, 3) == 1);

  m = mlcm_build({{{}, {"B"}}}, classes);
  CHECK(m.at(3, 1) == 1);

  m = mlcm_build({{{"A", "B"}, {"A", "C"}}}, classes);
  CHECK(m.at(0, 0) == 1);
  CHECK(m.at(1, 2) == 1);
  CHECK(m.total() == 2);

  m = mlcm_build({{{"A", "B"}, {"C"}}}, classes);
  CHECK(m.at(0, 2) == 1);
  CHECK(m.at(1, 2) == 1);

  CHECK_THROWS_AS(mlcm_build({{{"Z"}, {}}}, classes), AnalysisError);
}

TEST_CASE("conservation against a per-sample recount") {
  std::mt19937_64 rng(21);
  const std::vector<std::string> classes{"a", "b", "c", "d", "e"};
  std::vector<MLCMSample> samples;
  std::int64_t expected = 0;
  for (int i = 0; i < 2000; ++i) {
    MLCMSample s;
    for (const auto& c : classes) {
      if (rng() % 4 == 0) s.truth.insert(c);
      if (rng() % 4 == 0) s.predicted.insert(c);
    }
    std::int64_t matched = 0, missed = 0, spurious = 0;
    for (const auto& t : s.truth) (s.predicted.count(t) ? matched : missed)++;
    for (const auto& p : s.predicted) spurious += s.truth.count(p) ? 0 : 1;
    expected += matched + (missed == 0 ? spurious : missed * std::max<std::int64_t>(spurious, 1));
    samples.push_back(std::move(s));
  }
  const auto m = mlcm_build(samples, classes);
  CHECK(m.total() == expected);
  for (auto c : m.counts) CHECK(c >= 0);
}

TEST_CASE("published model-type metrics") {
  const auto m = MLCMatrix::from_grid(model_type_classes(), golden::kModelTypeGrid);
  const auto metrics = mlcm_metrics(m);
  REQUIRE(metrics.metrics.size() == 8);
  for (std::size_t i = 0; i < 8; ++i) {
    CAPTURE(metrics.classes[i]);
    REQUIRE(metrics.metrics[i].precision);
    REQUIRE(metrics.metrics[i].recall);
    CHECK(std::lround(*metrics.metrics[i].precision) == golden::kModelTypePrecision[i]);
    CHECK(std::lround(*metrics.metrics[i].recall) == golden::kModelTypeRecall[i]);
  }
  CHECK(*metrics.metrics[6].precision == doctest::Approx(100.0 * 38 / 39));
}

TEST_CASE("perfect predictor and empty classes") {
  const std::vector<std::string> classes{"A", "B"};
  const auto m = mlcm_build({{{"A"}, {"A"}}, {{"B"}, {"B"}}, {{"A", "B"}, {"A", "B"}}}, classes);
  for (const auto& cm : mlcm_metrics(m).metrics) {
    CHECK(*cm.precision == 100.0);
    CHECK(*cm.recall == 100.0);
  }
  const auto sparse = mlcm_build({{{"A"}, {"A"}}}, classes);
  const auto metrics = mlcm_metrics(sparse);
  CHECK_FALSE(metrics.metrics[1].precision);
  CHECK_FALSE(metrics.metrics[1].recall);
  CHECK_THROWS_AS(MLCMatrix::from_grid(classes, {{1, 2}}), AnalysisError);
}

TEST_CASE("annotation CSV") {
  const auto samples = parse_mlcm_csv("sample_id,true_labels,predicted_labels\n1,CNN;RNN,CNN\n2,,GNN\n3,MLP,\n");
  REQUIRE(samples.size() == 3);
  CHECK(samples[0].truth == std::set<std::string>{"CNN", "RNN"});
  CHECK(samples[1].truth.empty());
  CHECK(samples[2].predicted.empty());
  CHECK_THROWS_AS(parse_mlcm_csv("1,a,b,c\n"), AnalysisError);
}
