#pragma once

#include "benchforge/suite_config.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace benchforge {

class AnalysisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CoverageReport {
  std::map<Dimension, std::map<std::string, double>> proportions;
  // Only dimensions that have targets get a deviation.
  std::map<Dimension, double> deviation;
  double total_weight = 0.0;
};

CoverageReport coverage_proportions(const SuiteConfig& cfg);

struct MLCMatrix {
  std::vector<std::string> classes;
  // (C+1) x (C+1), row-major. Row C is NTL, column C is NPL.
  std::vector<std::int64_t> counts;

  std::size_t size() const { return classes.size() + 1; }
  std::int64_t& at(std::size_t row, std::size_t col) { return counts[row * size() + col]; }
  std::int64_t at(std::size_t row, std::size_t col) const { return counts[row * size() + col]; }
  std::int64_t total() const;

  static MLCMatrix zeros(std::vector<std::string> classes);
  static MLCMatrix from_grid(std::vector<std::string> classes,
                             const std::vector<std::vector<std::int64_t>>& grid);

  bool operator==(const MLCMatrix&) const = default;
};

struct MLCMSample {
  std::set<std::string> truth;
  std::set<std::string> predicted;
};

MLCMatrix mlcm_build(const std::vector<MLCMSample>& samples, const std::vector<std::string>& classes);

struct ClassMetric {
  std::optional<double> precision;  // percent
  std::optional<double> recall;     // percent
};

struct ClassMetrics {
  std::vector<std::string> classes;
  std::vector<ClassMetric> metrics;
};

ClassMetrics mlcm_metrics(const MLCMatrix& m);

/// Reads `sample_id,true_labels,predicted_labels` rows with `;`-separated labels.
/// A first row whose id is `sample_id` is taken as a header.
std::vector<MLCMSample> parse_mlcm_csv(std::string_view csv);

}  // namespace benchforge
