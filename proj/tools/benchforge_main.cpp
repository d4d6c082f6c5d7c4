// benchforge command line: install, prepare, run, report, design, mlcm.

#include "benchforge/aggregate.hpp"
#include "benchforge/design_analysis.hpp"
#include "benchforge/executor.hpp"
#include "benchforge/report.hpp"
#include "benchforge/suite_config.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace benchforge;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailures = 3;
constexpr int kExitConfig = 4;

/// Errors the user fixes by editing inputs rather than by rerunning.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string config;
  std::string base_dir = ".";
  std::string select;
  std::string devices = "1";
  int nodes = 1;
};

SuiteConfig load_checked(const Common& c) {
  if (c.config.empty()) throw UsageError("--config is required");
  auto cfg = load_suite(c.config);
  if (const auto problems = validate_suite(cfg); !problems.empty()) {
    std::string msg = "invalid suite:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw UsageError(msg);
  }
  if (!c.select.empty()) cfg = select_benchmarks(cfg, c.select);
  return cfg;
}

void write_output(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::string read_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int report_setup(const std::vector<SetupResult>& results, const char* phase) {
  int code = kExitOk;
  for (const auto& r : results) {
    std::cout << phase << " " << r.bench << ": " << to_string(r.status);
    if (!r.message.empty()) std::cout << " (" << r.message << ")";
    std::cout << "\n";
    if (r.status == SetupStatus::Failed) code = kExitFailures;
  }
  return code;
}

std::string fmt(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

int cmd_run(const Common& c, bool no_setup_check, const std::string& system, const std::string& run_name) {
  const auto cfg = load_checked(c);
  const auto pool = DevicePool::parse(c.devices, c.nodes);
  RunOptions options;
  options.check_setup = !no_setup_check;
  options.system_name = system;
  options.run_name = run_name;
  const auto result = run(cfg, pool, c.base_dir, options);

  std::vector<BenchResult> folded;
  for (const auto& record : result.records) {
    const auto& spec = *cfg.find(record.bench);
    folded.push_back(fold_bench(spec, record));
    const auto& b = folded.back();
    std::cout << record.bench << ": perf=" << humanize(b.perf) << " s=" << fmt(b.success_rate, 2);
    for (const auto& o : record.outcomes) {
      if (o.classified != Classified::Success) {
        std::cout << " [rank " << o.plan.rank << " " << to_string(o.classified) << ": " << o.reason << "]";
      }
    }
    std::cout << "\n";
  }
  try {
    std::cout << "global score: " << fmt(suite_score(folded).score, 2) << "\n";
  } catch (const ScoreError& e) {
    std::cout << "global score: n/a (" << e.what() << ")\n";
  }
  std::cout << "run directory: " << result.run_dir.string() << "\n";
  return result.all_succeeded() ? kExitOk : kExitFailures;
}

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int cmd_report(const Common& c, const std::string& runs, const std::string& baseline,
               const std::string& format, const std::string& output) {
  const auto fmt_kind = parse_report_format(format);
  if (!fmt_kind) throw UsageError("unknown report format '" + format + "'");

  std::vector<fs::path> dirs;
  if (runs.empty()) {
    const auto latest = latest_run(c.base_dir);
    if (!latest) throw UsageError("no runs under " + (fs::path(c.base_dir) / "runs").string());
    dirs.push_back(*latest);
  } else {
    for (const auto& d : split_commas(runs)) {
      fs::path p = d;
      if (!fs::exists(p / "meta.json")) {
        const auto latest = latest_run(p);
        if (!latest) throw UsageError("'" + d + "' is neither a run directory nor a base directory with runs");
        p = *latest;
      }
      dirs.push_back(p);
    }
  }

  std::vector<LoadedRun> loaded;
  for (const auto& d : dirs) loaded.push_back(load_run(d));
  std::optional<std::string> base;
  if (!baseline.empty()) base = baseline;
  std::map<std::string, std::string> metadata;
  for (const auto& l : loaded) metadata["run." + l.system] = l.run_dir.filename().string();
  const auto doc = render_report(fold_runs(loaded), base, metadata);
  write_output(serialize(doc, *fmt_kind), output);

  for (const auto& row : doc.rows) {
    for (const auto& cell : row.cells) {
      if (!cell.success_rate || *cell.success_rate < 1.0) return kExitFailures;
    }
  }
  return kExitOk;
}

int cmd_design(const Common& c, const std::string& format, const std::string& output) {
  auto cfg = load_checked(c);
  const auto report = coverage_proportions(cfg);
  if (format == "json") {
    nlohmann::json j;
    j["total_weight"] = report.total_weight;
    for (const auto& [dim, props] : report.proportions) {
      auto& d = j["dimensions"][std::string(to_string(dim))];
      d["proportions"] = props;
      if (cfg.targets && cfg.targets->by_dimension.count(dim)) d["targets"] = cfg.targets->by_dimension.at(dim);
      if (report.deviation.count(dim)) d["deviation"] = report.deviation.at(dim);
    }
    write_output(j.dump(2) + "\n", output);
    return kExitOk;
  }
  if (format != "text") throw UsageError("unknown design format '" + format + "'");

  std::ostringstream out;
  out << "total weight: " << fmt(report.total_weight, 2) << "\n";
  for (const auto& [dim, props] : report.proportions) {
    const std::map<std::string, double>* targets = nullptr;
    if (cfg.targets && cfg.targets->by_dimension.count(dim)) targets = &cfg.targets->by_dimension.at(dim);
    std::set<std::string> columns;
    for (const auto& [k, v] : props) columns.insert(k);
    if (targets) {
      for (const auto& [k, v] : *targets) columns.insert(k);
    }
    std::size_t width = 6;
    for (const auto& col : columns) width = std::max(width, col.size());

    out << "\n" << to_string(dim) << "\n";
    for (const auto& col : columns) {
      const auto p = props.count(col) ? props.at(col) : 0.0;
      out << "  " << col << std::string(width - col.size(), ' ') << "  " << fmt(p, 3);
      if (targets) {
        const auto t = targets->find(col);
        out << "  target " << (t == targets->end() ? std::string("-") : fmt(t->second, 3));
      }
      out << "\n";
    }
    if (report.deviation.count(dim)) out << "  deviation " << fmt(report.deviation.at(dim), 3) << "\n";
  }
  write_output(out.str(), output);
  return kExitOk;
}

int cmd_mlcm(const std::string& input, const std::string& classes_arg, const std::string& format,
             const std::string& output) {
  if (input.empty()) throw UsageError("--input is required");
  const auto samples = parse_mlcm_csv(read_input(input));
  std::vector<std::string> classes = split_commas(classes_arg);
  if (classes.empty()) {
    std::set<std::string> all;
    for (const auto& s : samples) {
      all.insert(s.truth.begin(), s.truth.end());
      all.insert(s.predicted.begin(), s.predicted.end());
    }
    classes.assign(all.begin(), all.end());
  }
  const auto m = mlcm_build(samples, classes);
  const auto metrics = mlcm_metrics(m);
  auto pct = [](const std::optional<double>& v) { return v ? fmt(*v, 0) : std::string("-"); };

  if (format == "json") {
    nlohmann::json j;
    j["classes"] = m.classes;
    j["counts"] = nlohmann::json::array();
    for (std::size_t r = 0; r < m.size(); ++r) {
      std::vector<std::int64_t> row;
      for (std::size_t col = 0; col < m.size(); ++col) row.push_back(m.at(r, col));
      j["counts"].push_back(row);
    }
    for (std::size_t i = 0; i < metrics.classes.size(); ++i) {
      const auto& cm = metrics.metrics[i];
      j["metrics"][metrics.classes[i]] = {
          {"precision", cm.precision ? nlohmann::json(*cm.precision) : nlohmann::json(nullptr)},
          {"recall", cm.recall ? nlohmann::json(*cm.recall) : nlohmann::json(nullptr)}};
    }
    write_output(j.dump(2) + "\n", output);
    return kExitOk;
  }
  if (format != "text") throw UsageError("unknown mlcm format '" + format + "'");

  std::vector<std::string> labels = m.classes;
  labels.push_back("NPL");
  std::size_t width = 9;
  for (const auto& l : labels) width = std::max(width, l.size());
  auto cell = [&](const std::string& s) { return std::string(width - std::min(width, s.size()), ' ') + s; };

  std::ostringstream out;
  out << cell("") ;
  for (const auto& l : labels) out << " " << cell(l);
  out << "\n";
  for (std::size_t r = 0; r < m.size(); ++r) {
    out << cell(r < m.classes.size() ? m.classes[r] : "NTL");
    for (std::size_t col = 0; col < m.size(); ++col) out << " " << cell(std::to_string(m.at(r, col)));
    out << "\n";
  }
  out << cell("Precision");
  for (const auto& cm : metrics.metrics) out << " " << cell(pct(cm.precision));
  out << "\n" << cell("Recall");
  for (const auto& cm : metrics.metrics) out << " " << cell(pct(cm.recall));
  out << "\n";
  write_output(out.str(), output);
  return kExitOk;
}

void add_common(CLI::App* sub, Common& c, bool with_pool) {
  sub->add_option("--config", c.config, "suite YAML file");
  sub->add_option("--base-dir", c.base_dir, "directory holding envs/, data/ and runs/");
  sub->add_option("--select", c.select, "benchmark selector, e.g. 'llm-*' or 'domain=NLP'");
  if (with_pool) {
    sub->add_option("--devices", c.devices, "device ids 'd0,d1,...' or a device count");
    sub->add_option("--nodes", c.nodes, "number of nodes the devices are split over");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"benchforge: benchmark suite harness"};
  app.require_subcommand(1);

  Common common;
  bool no_setup_check = false;
  std::string system, run_name, runs, baseline, output, input, classes;
  std::string format = "text";

  auto* install_cmd = app.add_subcommand("install", "run install commands");
  add_common(install_cmd, common, false);
  auto* prepare_cmd = app.add_subcommand("prepare", "run prepare commands");
  add_common(prepare_cmd, common, false);

  auto* run_cmd = app.add_subcommand("run", "run the selected benchmarks");
  add_common(run_cmd, common, true);
  run_cmd->add_flag("--no-setup-check", no_setup_check, "launch even when install/prepare did not complete");
  run_cmd->add_option("--system", system, "system label stored with the run");
  run_cmd->add_option("--run-name", run_name, "run directory name (default: UTC timestamp)");

  auto* report_cmd = app.add_subcommand("report", "aggregate one or more runs");
  add_common(report_cmd, common, false);
  report_cmd->add_option("--runs", runs, "comma-separated run directories or base directories");
  report_cmd->add_option("--baseline", baseline, "system used as ratio denominator");
  report_cmd->add_option("--format", format, "text|csv|json");
  report_cmd->add_option("-o,--output", output, "output file (default stdout)");

  auto* design_cmd = app.add_subcommand("design", "weighted coverage against design targets");
  add_common(design_cmd, common, false);
  design_cmd->add_option("--format", format, "text|json");
  design_cmd->add_option("-o,--output", output, "output file (default stdout)");

  auto* mlcm_cmd = app.add_subcommand("mlcm", "multi-label confusion matrix from annotations");
  mlcm_cmd->add_option("--input", input, "CSV of sample_id,true_labels,predicted_labels");
  mlcm_cmd->add_option("--classes", classes, "ordered comma-separated class list");
  mlcm_cmd->add_option("--format", format, "text|json");
  mlcm_cmd->add_option("-o,--output", output, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*install_cmd) return report_setup(install(load_checked(common), common.base_dir), "install");
    if (*prepare_cmd) return report_setup(prepare(load_checked(common), common.base_dir), "prepare");
    if (*run_cmd) return cmd_run(common, no_setup_check, system, run_name);
    if (*report_cmd) return cmd_report(common, runs, baseline, format, output);
    if (*design_cmd) return cmd_design(common, format, output);
    if (*mlcm_cmd) return cmd_mlcm(input, classes, format, output);
  } catch (const UsageError& e) {
    std::cerr << "benchforge: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ConfigError& e) {
    std::cerr << "benchforge: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ReportError& e) {
    std::cerr << "benchforge: " << e.what() << "\n";
    return kExitConfig;
  } catch (const AnalysisError& e) {
    std::cerr << "benchforge: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ExecutionError& e) {
    std::cerr << "benchforge: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "benchforge: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
