#include "benchforge/protocol.hpp"

#include "test_util.hpp"

#include <doctest.h>

using testutil::quote;
using testutil::run_command;

namespace {

const std::string kCli = quote(BENCHFORGE_CLI_PATH);
const std::string kWorker = quote(BENCHFORGE_WORKER_PATH);
const std::string kConfigs = BENCHFORGE_CONFIG_DIR;

std::string suite_yaml(const std::string& worker) {
  return "suite: cli\n"
         "benchmarks:\n"
         "  - name: ok\n"
         "    install_cmd: \"true\"\n"
         "    run_cmd: \"" + worker + " --seed {rank}\"\n"
         "    tags: {domains: [x]}\n"
         "  - name: broken\n"
         "    install_cmd: \"true\"\n"
         "    run_cmd: \"" + worker + " --kind crashing --crash-after 2\"\n"
         "    tags: {domains: [y]}\n";
}

}  // namespace

TEST_CASE("worker exit codes") {
  CHECK(run_command(kWorker + " --obs-max 5 --obs-min 5 > /dev/null").exit_code == 0);
  CHECK(run_command(kWorker + " --kind crashing --crash-after 3 > /dev/null").exit_code == 1);
  CHECK(run_command(kWorker + " --epochs-max 1 --epoch-length 5 > /dev/null").exit_code == 2);
  CHECK(run_command(kWorker + " --kind nonsense").exit_code == 1);
  CHECK(run_command(kWorker + " --rate -1 > /dev/null").exit_code == 1);
}

TEST_CASE("worker writes to the named channel") {
  testutil::TempDir dir;
  const auto path = (dir.path() / "metrics.jsonl").string();
  const auto r = run_command("BENCHFORGE_METRICS_FD=" + quote(path) + " " + kWorker + " --obs-max 10 --obs-min 10");
  CHECK(r.exit_code == 0);
  CHECK(r.output.empty());
  const auto items = benchforge::read_stream_text(testutil::read_file(path));
  int rates = 0;
  for (const auto& i : items) {
    REQUIRE(std::holds_alternative<benchforge::MetricEvent>(i));
    rates += std::get<benchforge::MetricEvent>(i).event == benchforge::EventKind::Rate;
  }
  CHECK(rates == 10);

  const auto fd = run_command("BENCHFORGE_METRICS_FD=5 " + kWorker + " --obs-max 3 --obs-min 3 5>" + quote(path + ".fd"));
  CHECK(fd.exit_code == 0);
  CHECK(testutil::read_file(path + ".fd").find("\"event\":\"end\"") != std::string::npos);
}

TEST_CASE("configuration errors exit with 4") {
  testutil::TempDir dir;
  testutil::write_file(dir.path() / "bad.yaml", "benchmarks: []\n");
  const auto r = run_command(kCli + " run --config " + quote((dir.path() / "bad.yaml").string()) +
                             " --base-dir " + quote(dir.path().string()));
  CHECK(r.exit_code == 4);
  CHECK(r.output.find("at least one benchmark") != std::string::npos);
  CHECK(run_command(kCli + " run --base-dir /tmp").exit_code == 4);
  CHECK(run_command(kCli + " frobnicate").exit_code == 4);
  CHECK(run_command(kCli + " design --config " + quote(kConfigs + "/main-suite.yaml") + " --select name=none").exit_code == 4);
}

TEST_CASE("full cycle through the command line") {
  testutil::TempDir dir;
  const auto cfg = (dir.path() / "suite.yaml").string();
  testutil::write_file(cfg, suite_yaml(BENCHFORGE_WORKER_PATH));
  const auto base = quote(dir.path().string());
  const auto common = " --config " + quote(cfg) + " --base-dir " + base;

  auto r = run_command(kCli + " run" + common + " --devices 2");
  CHECK(r.exit_code == 3);
  CHECK(r.output.find("setup incomplete") != std::string::npos);

  CHECK(run_command(kCli + " install" + common).exit_code == 0);
  CHECK(run_command(kCli + " prepare" + common).exit_code == 0);

  r = run_command(kCli + " run" + common + " --devices 2 --system A --select ok");
  CHECK(r.exit_code == 0);
  r = run_command(kCli + " run" + common + " --devices 2 --system B --run-name second");
  CHECK(r.exit_code == 3);

  const auto out = (dir.path() / "report.csv").string();
  r = run_command(kCli + " report --runs " + quote((dir.path() / "runs" / "second").string()) +
                  " --format csv -o " + quote(out));
  CHECK(r.exit_code == 3);
  const auto csv = testutil::read_file(out);
  CHECK(csv.find("bench,weight,perf,success_rate,system\n") != std::string::npos);
  CHECK(csv.find("broken,1,,0,B\n") != std::string::npos);

  r = run_command(kCli + " report --base-dir " + base + " --format json");
  CHECK(r.output.find("\"systems\"") != std::string::npos);
}

TEST_CASE("design and mlcm subcommands") {
  auto r = run_command(kCli + " design --config " + quote(kConfigs + "/main-suite.yaml"));
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("deviation") != std::string::npos);
  r = run_command(kCli + " design --config " + quote(kConfigs + "/main-suite.yaml") + " --format json");
  CHECK(r.exit_code == 0);
  const auto j = nlohmann::json::parse(r.output);
  CHECK(j["total_weight"] == 29.0);

  testutil::TempDir dir;
  const auto csv = (dir.path() / "ann.csv").string();
  testutil::write_file(csv, "sample_id,true_labels,predicted_labels\n1,CNN,CNN\n2,CNN;RNN,CNN\n3,,GNN\n");
  r = run_command(kCli + " mlcm --input " + quote(csv) + " --classes CNN,GNN,RNN --format json");
  CHECK(r.exit_code == 0);
  const auto m = nlohmann::json::parse(r.output);
  CHECK(m["counts"][0][0] == 2);
  CHECK(m["counts"][2][3] == 1);
  CHECK(m["counts"][3][1] == 1);
  CHECK(m["metrics"]["CNN"]["precision"] == 100.0);
  r = run_command(kCli + " mlcm --input " + quote(csv));
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("Precision") != std::string::npos);
}
