#include "benchforge/executor.hpp"

#include "benchforge/process.hpp"

#include <json.hpp>

#include <chrono>
#include <ctime>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace benchforge {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "benchforge 0.1.0";
constexpr const char* kInstallStamp = ".benchforge-install.stamp";
constexpr const char* kPrepareStamp = ".benchforge-prepare.stamp";

std::string safe_name(const std::string& name) {
  std::string out = name;
  for (auto& c : out) {
    if (c == '/' || c == '\\' || c == '\0') c = '_';
  }
  return out;
}

std::string join(const std::vector<std::string>& items, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ExecutionError("cannot write " + path.string());
  out << text;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ExecutionError("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

std::map<std::string, std::string> setup_vars(const fs::path& base_dir, const fs::path& bench_dir) {
  return {{"device_id", ""},
          {"device_count", "0"},
          {"rank", "0"},
          {"world_size", "1"},
          {"base_dir", base_dir.string()},
          {"bench_dir", bench_dir.string()}};
}

enum class SetupPhase { Install, Prepare };

SetupResult run_setup(const BenchmarkSpec& spec, const fs::path& base_dir, SetupPhase phase) {
  SetupResult result{spec.name, SetupStatus::NotRequired, 0, {}};
  const bool installing = phase == SetupPhase::Install;
  const std::string& command = installing ? spec.install_cmd : spec.prepare_cmd;
  if (command.empty()) return result;

  if (!installing && !spec.install_cmd.empty() &&
      !fs::exists(env_dir(base_dir, spec.name) / kInstallStamp)) {
    result.status = SetupStatus::Failed;
    result.message = "install not completed";
    return result;
  }

  const fs::path dir = installing ? env_dir(base_dir, spec.name) : data_dir(base_dir, spec.name);
  const fs::path stamp = dir / (installing ? kInstallStamp : kPrepareStamp);
  if (fs::exists(stamp)) {
    result.status = SetupStatus::Skipped;
    return result;
  }
  fs::create_directories(dir);

  SpawnRequest req;
  try {
    req.argv = shell_argv(expand_template(command, setup_vars(base_dir, dir)));
  } catch (const ConfigError& e) {
    result.status = SetupStatus::Failed;
    result.message = e.what();
    return result;
  }
  req.env = spec.env;
  req.env["BENCHFORGE_BENCH"] = spec.name;
  req.env["BENCHFORGE_BENCH_DIR"] = dir.string();
  req.env["BENCHFORGE_BASE_DIR"] = base_dir.string();
  req.cwd = dir;
  req.output_path = dir / (installing ? "install.log" : "prepare.log");
  req.timeout_s = spec.timeout_s;

  const auto spawned = run_process(req);
  result.exit_code = spawned.exit_code;
  if (spawned.spawn_failed) {
    result.status = SetupStatus::Failed;
    result.message = spawned.spawn_error;
  } else if (spawned.timed_out) {
    result.status = SetupStatus::Failed;
    result.message = "timeout";
  } else if (spawned.exit_code != 0) {
    result.status = SetupStatus::Failed;
    result.message = "exit code " + std::to_string(spawned.exit_code);
  } else {
    write_file(stamp, command + "\n");
    result.status = SetupStatus::Done;
  }
  return result;
}

std::vector<SetupResult> run_setup_all(const SuiteConfig& cfg, const fs::path& base_dir,
                                       SetupPhase phase) {
  std::vector<SetupResult> results;
  for (const auto& spec : cfg.benchmarks) {
    if (!spec.enabled) continue;
    results.push_back(run_setup(spec, base_dir, phase));
  }
  return results;
}

json plan_to_json(const ProcessPlan& p) {
  json j{{"rank", p.rank},       {"world_size", p.world_size}, {"node", p.node},
         {"devices", p.devices}, {"command", p.command},       {"timeout_s", p.timeout_s},
         {"obs_min", p.obs_min}, {"obs_max", p.obs_max}};
  j["gang"] = p.gang ? json(*p.gang) : json(nullptr);
  return j;
}

ProcessPlan plan_from_json(const json& j, const std::string& bench) {
  ProcessPlan p;
  p.bench = bench;
  p.rank = j.at("rank").get<int>();
  p.world_size = j.at("world_size").get<int>();
  p.node = j.value("node", 0);
  p.devices = j.value("devices", std::vector<std::string>{});
  p.command = j.value("command", std::vector<std::string>{});
  p.timeout_s = j.value("timeout_s", 300.0);
  p.obs_min = j.value("obs_min", 30);
  p.obs_max = j.value("obs_max", 60);
  if (j.contains("gang") && !j["gang"].is_null()) p.gang = j["gang"].get<int>();
  return p;
}

ProcessOutcome failed_without_launch(const ProcessPlan& plan, std::string reason) {
  ProcessOutcome out;
  out.plan = plan;
  out.log.process_id = plan.bench + "/" + std::to_string(plan.rank);
  out.log.terminal = Terminal::Error;
  out.log.message = reason;
  out.exit_code = -1;
  out.classified = Classified::Error;
  out.reason = std::move(reason);
  return out;
}

}  // namespace

std::string_view to_string(Classified c) {
  switch (c) {
    case Classified::Success:
      return "success";
    case Classified::Error:
      return "error";
    case Classified::Timeout:
      return "timeout";
  }
  return "unknown";
}

std::optional<Classified> parse_classified(std::string_view text) {
  if (text == "success") return Classified::Success;
  if (text == "error") return Classified::Error;
  if (text == "timeout") return Classified::Timeout;
  return std::nullopt;
}

std::string_view to_string(SetupStatus s) {
  switch (s) {
    case SetupStatus::Done:
      return "done";
    case SetupStatus::Skipped:
      return "skipped";
    case SetupStatus::NotRequired:
      return "not-required";
    case SetupStatus::Failed:
      return "failed";
  }
  return "unknown";
}

DevicePool DevicePool::make(std::vector<std::string> devices, int nodes) {
  DevicePool pool;
  pool.devices = std::move(devices);
  pool.nodes = nodes;
  if (nodes <= 0) return pool;
  const std::size_t n = pool.devices.size();
  const std::size_t per_node = (n + static_cast<std::size_t>(nodes) - 1) / static_cast<std::size_t>(nodes);
  for (std::size_t i = 0; i < n; ++i) {
    pool.node_assignment[pool.devices[i]] = per_node ? static_cast<int>(i / per_node) : 0;
  }
  return pool;
}

DevicePool DevicePool::parse(std::string_view text, int nodes) {
  std::vector<std::string> devices;
  const std::string s(text);
  if (!s.empty() && s.find_first_not_of("0123456789") == std::string::npos) {
    const int count = std::stoi(s);
    for (int i = 0; i < count; ++i) devices.push_back(std::to_string(i));
  } else {
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (!item.empty()) devices.push_back(item);
    }
  }
  return make(std::move(devices), nodes);
}

std::vector<std::string> DevicePool::devices_on(int node) const {
  std::vector<std::string> out;
  for (const auto& d : devices) {
    const auto it = node_assignment.find(d);
    if (it != node_assignment.end() && it->second == node) out.push_back(d);
  }
  return out;
}

std::vector<std::string> DevicePool::validate() const {
  std::vector<std::string> problems;
  if (devices.empty()) problems.push_back("device pool is empty");
  if (nodes <= 0) problems.push_back("node count must be positive");
  std::set<std::string> seen;
  for (const auto& d : devices) {
    if (!seen.insert(d).second) problems.push_back("duplicate device id '" + d + "'");
    const auto it = node_assignment.find(d);
    if (it == node_assignment.end()) {
      problems.push_back("device '" + d + "' has no node");
    } else if (it->second < 0 || it->second >= nodes) {
      problems.push_back("device '" + d + "' assigned to invalid node");
    }
  }
  if (node_assignment.size() != seen.size()) {
    problems.push_back("node assignment mentions devices outside the pool");
  }
  return problems;
}

fs::path env_dir(const fs::path& base_dir, const std::string& bench) {
  return base_dir / "envs" / safe_name(bench);
}

fs::path data_dir(const fs::path& base_dir, const std::string& bench) {
  return base_dir / "data" / safe_name(bench);
}

std::vector<SetupResult> install(const SuiteConfig& cfg, const fs::path& base_dir) {
  return run_setup_all(cfg, base_dir, SetupPhase::Install);
}

std::vector<SetupResult> prepare(const SuiteConfig& cfg, const fs::path& base_dir) {
  return run_setup_all(cfg, base_dir, SetupPhase::Prepare);
}

bool setup_complete(const BenchmarkSpec& spec, const fs::path& base_dir) {
  const bool installed =
      spec.install_cmd.empty() || fs::exists(env_dir(base_dir, spec.name) / kInstallStamp);
  const bool prepared =
      spec.prepare_cmd.empty() || fs::exists(data_dir(base_dir, spec.name) / kPrepareStamp);
  return installed && prepared;
}

std::vector<ProcessPlan> plan_launches(const BenchmarkSpec& spec, const DevicePool& pool,
                                       const fs::path& base_dir) {
  if (const auto problems = pool.validate(); !problems.empty()) {
    throw ExecutionError("invalid device pool: " + join(problems, "; "));
  }

  std::vector<std::string> members;
  std::optional<int> gang;
  switch (spec.scale) {
    case ScaleMode::SingleDevice:
      members = pool.devices;
      break;
    case ScaleMode::NodeDevices:
      members = pool.devices_on(0);
      gang = 0;
      break;
    case ScaleMode::MultiNode:
      if (pool.nodes < 2) throw ExecutionError("insufficient nodes for multi-node benchmark '" + spec.name + "'");
      members = pool.devices;
      gang = 0;
      break;
  }
  if (members.empty()) throw ExecutionError("no devices available for '" + spec.name + "'");

  const int world = static_cast<int>(members.size());
  const fs::path bench_dir = data_dir(base_dir, spec.name);
  // Rendezvous port derived from the name so concurrent gangs never share one.
  unsigned port_seed = 0;
  for (unsigned char c : spec.name) port_seed = port_seed * 31 + c;
  const std::string port = std::to_string(29500 + port_seed % 1000);

  std::vector<ProcessPlan> plans;
  for (int rank = 0; rank < world; ++rank) {
    ProcessPlan plan;
    plan.bench = spec.name;
    plan.rank = rank;
    plan.world_size = world;
    plan.gang = gang;
    plan.devices = {members[static_cast<std::size_t>(rank)]};
    plan.node = pool.node_assignment.at(plan.devices.front());
    plan.timeout_s = spec.timeout_s;
    plan.obs_min = spec.obs_min;
    plan.obs_max = spec.obs_max;

    const std::map<std::string, std::string> vars = {
        {"device_id", plan.devices.front()},
        {"device_count", std::to_string(gang ? world : 1)},
        {"rank", std::to_string(rank)},
        {"world_size", std::to_string(world)},
        {"base_dir", base_dir.string()},
        {"bench_dir", bench_dir.string()}};
    for (const auto& [k, v] : spec.env) plan.env[k] = expand_template(v, vars);
    plan.env["BENCHFORGE_BENCH"] = spec.name;
    plan.env["BENCHFORGE_DEVICE"] = plan.devices.front();
    plan.env["BENCHFORGE_RANK"] = std::to_string(rank);
    plan.env["BENCHFORGE_WORLD_SIZE"] = std::to_string(world);
    plan.env["BENCHFORGE_NODE"] = std::to_string(plan.node);
    plan.env["BENCHFORGE_BENCH_DIR"] = bench_dir.string();
    plan.env["BENCHFORGE_OBS_MIN"] = std::to_string(spec.obs_min);
    plan.env["BENCHFORGE_OBS_MAX"] = std::to_string(spec.obs_max);
    if (gang) {
      plan.env["BENCHFORGE_MASTER_ADDR"] = "127.0.0.1";
      plan.env["BENCHFORGE_MASTER_PORT"] = port;
    }
    plan.command = shell_argv(expand_template(spec.run_cmd, vars));
    plans.push_back(std::move(plan));
  }
  return plans;
}

ObservationLog ingest_events(const std::vector<StreamItem>& items, const std::string& process_id) {
  ObservationLog log;
  log.process_id = process_id;
  log.terminal = Terminal::Success;
  std::map<std::string, double> pending_loss;
  for (const auto& item : items) {
    if (const auto* err = std::get_if<StreamError>(&item)) {
      log.terminal = Terminal::Error;
      log.message = "metric stream failed: " + err->message;
      continue;
    }
    const auto* e = std::get_if<MetricEvent>(&item);
    if (!e) continue;
    log.raw_events.push_back(*e);
    switch (e->event) {
      case EventKind::Loss:
        if (e->data.contains("loss") && e->data["loss"].is_number()) {
          pending_loss[e->task] = e->data["loss"].get<double>();
        }
        break;
      case EventKind::Rate: {
        Observation o;
        o.work = e->data["batch"].get<double>();
        o.elapsed = e->data.contains("elapsed") ? e->data["elapsed"].get<double>()
                                                : o.work / e->data["rate"].get<double>();
        o.warmup = e->data.value("warmup", false);
        o.task = e->task;
        if (auto it = pending_loss.find(e->task); it != pending_loss.end()) {
          o.loss = it->second;
          pending_loss.erase(it);
        }
        log.observations.push_back(std::move(o));
        break;
      }
      case EventKind::Error:
        log.terminal = Terminal::Error;
        if (log.message.empty()) {
          log.message = e->data.contains("message") && e->data["message"].is_string()
                            ? e->data["message"].get<std::string>()
                            : "error event";
        }
        break;
      default:
        break;
    }
  }
  return log;
}

Classified classify(int exit_code, bool timed_out, const ObservationLog& log, int obs_min,
                    std::string* reason) {
  auto set = [&](Classified c, std::string why) {
    if (reason) *reason = std::move(why);
    return c;
  };
  if (timed_out) return set(Classified::Timeout, "timeout");
  if (exit_code != 0) {
    return set(Classified::Error,
               log.message.empty() ? "exit code " + std::to_string(exit_code) : log.message);
  }
  if (log.terminal != Terminal::Success) {
    return set(Classified::Error, log.message.empty() ? "error" : log.message);
  }
  const auto counts = log.counts_by_task();
  if (counts.empty()) return set(Classified::Error, "insufficient observations");
  for (const auto& [task, n] : counts) {
    if (n < static_cast<std::size_t>(obs_min)) return set(Classified::Error, "insufficient observations");
  }
  return set(Classified::Success, "");
}

ProcessOutcome supervise(const ProcessPlan& plan, const SuperviseOptions& options) {
  ProcessOutcome outcome;
  outcome.plan = plan;
  const std::string id = plan.bench + "/" + std::to_string(plan.rank);

  std::ofstream capture;
  if (!options.metrics_path.empty()) capture.open(options.metrics_path, std::ios::binary | std::ios::trunc);

  std::vector<StreamItem> items;
  LineFramer framer;
  auto take = [&items](std::vector<DecodeResult>&& results) {
    for (auto& r : results) {
      std::visit([&items](auto&& v) { items.emplace_back(std::move(v)); }, std::move(r));
    }
  };

  SpawnRequest req;
  req.argv = plan.command;
  req.env = plan.env;
  req.output_path = options.output_path;
  req.metrics_channel = true;
  req.timeout_s = plan.timeout_s;

  const auto* abort_flag = options.abort;
  const auto spawned = run_process(
      req,
      [&](std::string_view bytes) {
        if (capture) capture.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        take(framer.feed(bytes));
      },
      [abort_flag] { return abort_flag && abort_flag->load(); });
  take(framer.finish());
  capture.close();

  outcome.log = ingest_events(items, id);
  outcome.exit_code = spawned.spawn_failed ? -1 : spawned.exit_code;
  outcome.duration_s = spawned.duration_s;

  if (spawned.spawn_failed) {
    outcome.classified = Classified::Error;
    outcome.reason = spawned.spawn_error;
  } else if (spawned.aborted) {
    outcome.classified = Classified::Error;
    outcome.reason = "gang member failed";
  } else {
    outcome.classified =
        classify(spawned.exit_code, spawned.timed_out, outcome.log, plan.obs_min, &outcome.reason);
  }
  switch (outcome.classified) {
    case Classified::Success:
      outcome.log.terminal = Terminal::Success;
      break;
    case Classified::Timeout:
      outcome.log.terminal = Terminal::Timeout;
      break;
    case Classified::Error:
      outcome.log.terminal = Terminal::Error;
      if (outcome.log.message.empty()) outcome.log.message = outcome.reason;
      break;
  }
  return outcome;
}

bool RunResult::all_succeeded() const {
  for (const auto& r : records) {
    if (r.outcomes.empty()) return false;
    for (const auto& o : r.outcomes) {
      if (o.classified != Classified::Success) return false;
    }
  }
  return true;
}

RunResult run(const SuiteConfig& cfg, const DevicePool& pool, const fs::path& base_dir,
              const RunOptions& options) {
  if (const auto problems = pool.validate(); !problems.empty()) {
    throw ExecutionError("invalid device pool: " + join(problems, "; "));
  }

  const std::string stamp = utc_timestamp();
  std::string name = options.run_name.empty() ? stamp : options.run_name;
  fs::path run_dir = base_dir / "runs" / name;
  for (int i = 2; fs::exists(run_dir); ++i) run_dir = base_dir / "runs" / (name + "-" + std::to_string(i));
  fs::create_directories(run_dir);

  RunResult result;
  result.run_dir = run_dir;

  json meta;
  meta["system"] = options.system_name.empty() ? run_dir.filename().string() : options.system_name;
  meta["suite_hash"] = suite_hash(cfg);
  meta["suite_name"] = cfg.suite_name;
  meta["timestamp"] = stamp;
  meta["version"] = kVersion;
  meta["pool"] = {{"devices", pool.devices}, {"nodes", pool.nodes}};
  meta["suite"] = render_suite(cfg);
  meta["benchmarks"] = json::array();

  for (const auto& spec : cfg.benchmarks) {
    if (!spec.enabled) continue;
    meta["benchmarks"].push_back(spec.name);
    const fs::path bench_dir = run_dir / safe_name(spec.name);
    fs::create_directories(bench_dir);
    RunRecord record;
    record.bench = spec.name;
    record.run_dir = bench_dir;
    const auto t0 = std::chrono::steady_clock::now();

    std::vector<ProcessPlan> plans;
    std::string plan_error;
    try {
      plans = plan_launches(spec, pool, base_dir);
    } catch (const std::exception& e) {
      plan_error = e.what();
    }

    if (!plan_error.empty()) {
      // Nothing launchable; the record stays empty and folds to a failure.
    } else if (options.check_setup && !setup_complete(spec, base_dir)) {
      for (const auto& p : plans) record.outcomes.push_back(failed_without_launch(p, "setup incomplete"));
    } else {
      record.outcomes.resize(plans.size());
      std::map<int, std::unique_ptr<std::atomic<bool>>> gang_abort;
      for (const auto& p : plans) {
        if (p.gang && !gang_abort.count(*p.gang)) {
          gang_abort[*p.gang] = std::make_unique<std::atomic<bool>>(false);
        }
      }
      {
        std::vector<std::jthread> workers;
        for (std::size_t i = 0; i < plans.size(); ++i) {
          workers.emplace_back([&, i] {
            const auto& plan = plans[i];
            SuperviseOptions opts;
            opts.metrics_path = bench_dir / (std::to_string(plan.rank) + ".jsonl");
            opts.output_path = bench_dir / (std::to_string(plan.rank) + ".log");
            std::atomic<bool>* abort = plan.gang ? gang_abort.at(*plan.gang).get() : nullptr;
            opts.abort = abort;
            auto outcome = supervise(plan, opts);
            if (abort && outcome.classified != Classified::Success) abort->store(true);
            record.outcomes[i] = std::move(outcome);
          });
        }
      }
      // A gang is one unit of success.
      for (const auto& [gang, flag] : gang_abort) {
        bool failed = false;
        for (const auto& o : record.outcomes) {
          if (o.plan.gang == gang && o.classified != Classified::Success) failed = true;
        }
        if (!failed) continue;
        for (auto& o : record.outcomes) {
          if (o.plan.gang == gang && o.classified == Classified::Success) {
            o.classified = Classified::Error;
            o.reason = "gang member failed";
            o.log.terminal = Terminal::Error;
            o.log.message = o.reason;
          }
        }
      }
    }

    record.phase_durations["run"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    json outcomes = json::array();
    for (const auto& o : record.outcomes) {
      json j = plan_to_json(o.plan);
      j["exit_code"] = o.exit_code;
      j["duration_s"] = o.duration_s;
      j["classified"] = std::string(to_string(o.classified));
      j["reason"] = o.reason;
      j["observations"] = o.log.observations.size();
      outcomes.push_back(std::move(j));
    }
    json bench_meta{{"bench", spec.name},
                    {"scale", std::string(to_string(spec.scale))},
                    {"planned", plans.size()},
                    {"plan_error", plan_error},
                    {"phase_durations", record.phase_durations},
                    {"outcomes", outcomes}};
    write_file(bench_dir / "outcomes.json", bench_meta.dump(2) + "\n");
    result.records.push_back(std::move(record));
  }

  write_file(run_dir / "meta.json", meta.dump(2) + "\n");
  return result;
}

LoadedRun load_run(const fs::path& run_dir) {
  LoadedRun loaded;
  loaded.run_dir = run_dir;
  json meta;
  try {
    meta = json::parse(read_file(run_dir / "meta.json"));
  } catch (const json::exception& e) {
    throw ExecutionError("malformed meta.json in " + run_dir.string() + ": " + e.what());
  }
  loaded.system = meta.value("system", run_dir.filename().string());
  loaded.suite_hash = meta.value("suite_hash", "");
  loaded.timestamp = meta.value("timestamp", "");
  loaded.suite = parse_suite(meta.at("suite").get<std::string>());
  if (meta.contains("pool")) loaded.pool = meta["pool"].value("devices", std::vector<std::string>{});

  for (const auto& bench_json : meta.value("benchmarks", json::array())) {
    const auto bench = bench_json.get<std::string>();
    const fs::path bench_dir = run_dir / safe_name(bench);
    RunRecord record;
    record.bench = bench;
    record.run_dir = bench_dir;
    json outcomes_meta = json::parse(read_file(bench_dir / "outcomes.json"));
    const json durations = outcomes_meta.value("phase_durations", json::object());
    for (const auto& [k, v] : durations.items()) {
      record.phase_durations[k] = v.get<double>();
    }
    for (const auto& oj : outcomes_meta.at("outcomes")) {
      ProcessOutcome o;
      o.plan = plan_from_json(oj, bench);
      const fs::path stream = bench_dir / (std::to_string(o.plan.rank) + ".jsonl");
      const std::string id = bench + "/" + std::to_string(o.plan.rank);
      if (fs::exists(stream)) {
        o.log = ingest_events(read_stream_text(read_file(stream)), id);
      } else {
        o.log.process_id = id;
      }
      o.exit_code = oj.value("exit_code", -1);
      o.duration_s = oj.value("duration_s", 0.0);
      o.classified = parse_classified(oj.value("classified", "error")).value_or(Classified::Error);
      o.reason = oj.value("reason", "");
      o.log.terminal = o.classified == Classified::Success   ? Terminal::Success
                       : o.classified == Classified::Timeout ? Terminal::Timeout
                                                             : Terminal::Error;
      record.outcomes.push_back(std::move(o));
    }
    loaded.records.push_back(std::move(record));
  }
  return loaded;
}

std::optional<fs::path> latest_run(const fs::path& base_dir) {
  const fs::path runs = base_dir / "runs";
  if (!fs::is_directory(runs)) return std::nullopt;
  std::optional<fs::path> best;
  for (const auto& entry : fs::directory_iterator(runs)) {
    if (!entry.is_directory() || !fs::exists(entry.path() / "meta.json")) continue;
    if (!best || entry.path().filename().string() > best->filename().string()) best = entry.path();
  }
  return best;
}

}  // namespace benchforge
