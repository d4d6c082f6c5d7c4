#pragma once

#include "benchforge/suite_config.hpp"
#include "benchforge/timed_runner.hpp"

#include <atomic>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace benchforge {

/// Declared (not probed) set of devices, spread over one or more nodes.
struct DevicePool {
  std::vector<std::string> devices;
  int nodes = 1;
  std::map<std::string, int> node_assignment;

  /// Splits devices into `nodes` contiguous, equally sized blocks.
  static DevicePool make(std::vector<std::string> devices, int nodes = 1);
  /// "d0,d1,..." or a bare count N for devices 0..N-1.
  static DevicePool parse(std::string_view devices, int nodes = 1);

  std::vector<std::string> devices_on(int node) const;
  /// Empty iff ids are unique and every device sits on exactly one valid node.
  std::vector<std::string> validate() const;
};

struct ProcessPlan {
  std::string bench;
  int rank = 0;
  int world_size = 1;
  int node = 0;
  std::optional<int> gang;  // ranks sharing a gang succeed or fail together
  std::vector<std::string> devices;
  std::map<std::string, std::string> env;
  std::vector<std::string> command;
  double timeout_s = 300.0;
  int obs_min = 30;
  int obs_max = 60;
};

enum class Classified { Success, Error, Timeout };

std::string_view to_string(Classified c);
std::optional<Classified> parse_classified(std::string_view text);

struct ProcessOutcome {
  ProcessPlan plan;
  ObservationLog log;
  int exit_code = -1;
  double duration_s = 0.0;
  Classified classified = Classified::Error;
  std::string reason;
};

struct RunRecord {
  std::string bench;
  std::vector<ProcessOutcome> outcomes;
  std::map<std::string, double> phase_durations;
  std::filesystem::path run_dir;
};

enum class SetupStatus { Done, Skipped, NotRequired, Failed };

std::string_view to_string(SetupStatus s);

struct SetupResult {
  std::string bench;
  SetupStatus status = SetupStatus::NotRequired;
  int exit_code = 0;
  std::string message;
};

class ExecutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::filesystem::path env_dir(const std::filesystem::path& base_dir, const std::string& bench);
std::filesystem::path data_dir(const std::filesystem::path& base_dir, const std::string& bench);

/// Runs install_cmd per enabled benchmark inside base_dir/envs/<name>.
/// A stamp file makes completed installs no-ops on later calls.
std::vector<SetupResult> install(const SuiteConfig& cfg, const std::filesystem::path& base_dir);

/// Runs prepare_cmd per enabled benchmark with {bench_dir} = base_dir/data/<name>.
std::vector<SetupResult> prepare(const SuiteConfig& cfg, const std::filesystem::path& base_dir);

bool setup_complete(const BenchmarkSpec& spec, const std::filesystem::path& base_dir);

/// Expands one benchmark into its process launches.
///
/// single-device: one independent process per pool device.
/// node-devices: one gang of per-device ranks on node 0.
/// multi-node: one gang spanning every device of every node (needs >= 2 nodes).
std::vector<ProcessPlan> plan_launches(const BenchmarkSpec& spec, const DevicePool& pool,
                                       const std::filesystem::path& base_dir = {});

struct SuperviseOptions {
  std::filesystem::path metrics_path;  // raw channel bytes copied here
  std::filesystem::path output_path;   // child stdout/stderr
  const std::atomic<bool>* abort = nullptr;
};

/// Launches one plan, ingests its metric stream until exit or timeout and
/// classifies the outcome.
ProcessOutcome supervise(const ProcessPlan& plan, const SuperviseOptions& options = {});

/// Rebuilds an ObservationLog from decoded events (harness-side ingestion).
ObservationLog ingest_events(const std::vector<StreamItem>& items, const std::string& process_id);

/// Success iff exit 0, no error event, and each task has obs_min observations.
Classified classify(int exit_code, bool timed_out, const ObservationLog& log, int obs_min,
                    std::string* reason = nullptr);

struct RunOptions {
  bool check_setup = true;
  std::string system_name;  // label used by reports; defaults to the run directory name
  std::string run_name;     // defaults to a timestamp
};

struct RunResult {
  std::filesystem::path run_dir;
  std::vector<RunRecord> records;
  bool all_succeeded() const;
};

/// Runs enabled benchmarks one after another; the processes of one
/// benchmark run concurrently. Failures never abort the suite.
RunResult run(const SuiteConfig& cfg, const DevicePool& pool, const std::filesystem::path& base_dir,
              const RunOptions& options = {});

/// A run directory read back from disk.
struct LoadedRun {
  std::filesystem::path run_dir;
  std::string system;
  std::string suite_hash;
  std::string timestamp;
  SuiteConfig suite;
  std::vector<std::string> pool;
  std::vector<RunRecord> records;
};

LoadedRun load_run(const std::filesystem::path& run_dir);

/// Most recent directory under base_dir/runs.
std::optional<std::filesystem::path> latest_run(const std::filesystem::path& base_dir);

}  // namespace benchforge
