#pragma once

#include "benchforge/aggregate.hpp"
#include "benchforge/executor.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace benchforge {

class ReportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Folded results of one system (one run directory).
struct SystemResults {
  std::string name;
  std::string suite_hash;
  std::vector<BenchResult> results;
};

struct ReportCell {
  std::optional<double> perf;  // absent when the bench failed or is missing
  std::optional<double> success_rate;
  std::optional<double> ratio;

  bool operator==(const ReportCell&) const = default;
};

struct ReportRow {
  std::string bench;
  double weight = 0.0;
  std::vector<ReportCell> cells;  // parallel to ReportDocument::systems

  bool operator==(const ReportRow&) const = default;
};

struct GlobalCell {
  std::optional<double> score;
  double total_weight = 0.0;
  std::optional<double> ratio;

  bool operator==(const GlobalCell&) const = default;
};

struct ReportDocument {
  std::vector<std::string> systems;
  std::optional<std::string> baseline;
  std::vector<ReportRow> rows;
  std::vector<GlobalCell> global;  // parallel to systems
  std::map<std::string, std::string> metadata;

  bool operator==(const ReportDocument&) const = default;
};

enum class ReportFormat { Text, Csv, Json };

std::optional<ReportFormat> parse_report_format(std::string_view text);

/// Merges systems into one document. Rows follow the first system's order
/// (the baseline's when given); benches missing on a system enter its
/// global score with p*s = 0.
ReportDocument render_report(const std::vector<SystemResults>& systems,
                             const std::optional<std::string>& baseline,
                             std::map<std::string, std::string> metadata = {});

/// Folds loaded run directories into SystemResults, one per run.
std::vector<SystemResults> fold_runs(const std::vector<LoadedRun>& runs, bool drop_warmup = true);

/// Compact magnitude: 62.3, 16.8K, 32.2M.
std::string humanize(double value);
/// Inverse of humanize (accepts K/M suffixes).
double parse_humanized(std::string_view text);

std::string to_text(const ReportDocument& doc);
std::string to_csv(const ReportDocument& doc);
nlohmann::json to_json(const ReportDocument& doc);
std::string serialize(const ReportDocument& doc, ReportFormat format);

ReportDocument parse_csv(std::string_view csv);

}  // namespace benchforge
