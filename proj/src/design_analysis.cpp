#include "benchforge/design_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace benchforge {

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::set<std::string> split_labels(const std::string& text) {
  std::set<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    item = trim(item);
    if (!item.empty()) out.insert(item);
  }
  return out;
}

}  // namespace

CoverageReport coverage_proportions(const SuiteConfig& cfg) {
  CoverageReport report;
  for (const auto& b : cfg.benchmarks) {
    if (!b.enabled || b.weight <= 0.0) continue;
    if (b.tags.empty()) throw AnalysisError("benchmark '" + b.name + "' has no taxonomy tags");
    report.total_weight += b.weight;
  }
  if (report.total_weight <= 0.0) throw AnalysisError("suite has no weighted benchmarks");

  for (auto dim : kAllDimensions) {
    auto& props = report.proportions[dim];
    for (const auto& b : cfg.benchmarks) {
      if (!b.enabled || b.weight <= 0.0) continue;
      for (const auto& label : b.tags.labels(dim)) props[label] += b.weight;
    }
    for (auto& [label, value] : props) value /= report.total_weight;
  }

  if (cfg.targets) {
    for (const auto& [dim, targets] : cfg.targets->by_dimension) {
      const auto& props = report.proportions[dim];
      std::set<std::string> columns;
      for (const auto& [label, v] : props) columns.insert(label);
      for (const auto& [label, v] : targets) columns.insert(label);
      double dev = 0.0;
      for (const auto& c : columns) {
        const auto p = props.find(c);
        const auto t = targets.find(c);
        dev += std::abs((p == props.end() ? 0.0 : p->second) - (t == targets.end() ? 0.0 : t->second));
      }
      report.deviation[dim] = dev;
    }
  }
  return report;
}

std::int64_t MLCMatrix::total() const {
  std::int64_t sum = 0;
  for (auto c : counts) sum += c;
  return sum;
}

MLCMatrix MLCMatrix::zeros(std::vector<std::string> classes) {
  MLCMatrix m;
  m.classes = std::move(classes);
  m.counts.assign(m.size() * m.size(), 0);
  return m;
}

MLCMatrix MLCMatrix::from_grid(std::vector<std::string> classes,
                               const std::vector<std::vector<std::int64_t>>& grid) {
  auto m = zeros(std::move(classes));
  if (grid.size() != m.size()) throw AnalysisError("MLCM grid must have C+1 rows");
  for (std::size_t r = 0; r < grid.size(); ++r) {
    if (grid[r].size() != m.size()) throw AnalysisError("MLCM grid must have C+1 columns");
    for (std::size_t c = 0; c < grid[r].size(); ++c) {
      if (grid[r][c] < 0) throw AnalysisError("MLCM counts must be non-negative");
      m.at(r, c) = grid[r][c];
    }
  }
  return m;
}

MLCMatrix mlcm_build(const std::vector<MLCMSample>& samples, const std::vector<std::string>& classes) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (!index.emplace(classes[i], i).second) throw AnalysisError("duplicate class '" + classes[i] + "'");
  }
  auto idx = [&](const std::string& label) {
    const auto it = index.find(label);
    if (it == index.end()) throw AnalysisError("unknown label '" + label + "'");
    return it->second;
  };

  auto m = MLCMatrix::zeros(classes);
  const std::size_t none = classes.size();
  for (const auto& s : samples) {
    std::vector<std::size_t> missed, spurious;
    for (const auto& t : s.truth) {
      if (s.predicted.count(t)) {
        const auto i = idx(t);
        ++m.at(i, i);
      } else {
        missed.push_back(idx(t));
      }
    }
    for (const auto& p : s.predicted) {
      if (!s.truth.count(p)) spurious.push_back(idx(p));
    }
    for (auto t : missed) {
      if (spurious.empty()) {
        ++m.at(t, none);
      } else {
        for (auto p : spurious) ++m.at(t, p);
      }
    }
    if (missed.empty()) {
      for (auto p : spurious) ++m.at(none, p);
    }
  }
  return m;
}

ClassMetrics mlcm_metrics(const MLCMatrix& m) {
  ClassMetrics out;
  out.classes = m.classes;
  const std::size_t n = m.size();
  for (std::size_t c = 0; c < m.classes.size(); ++c) {
    std::int64_t col = 0, row = 0;
    for (std::size_t k = 0; k < n; ++k) {
      col += m.at(k, c);
      row += m.at(c, k);
    }
    ClassMetric metric;
    const double diag = static_cast<double>(m.at(c, c));
    if (col > 0) metric.precision = 100.0 * diag / static_cast<double>(col);
    if (row > 0) metric.recall = 100.0 * diag / static_cast<double>(row);
    out.metrics.push_back(metric);
  }
  return out;
}

std::vector<MLCMSample> parse_mlcm_csv(std::string_view csv) {
  std::vector<MLCMSample> samples;
  std::stringstream in{std::string(csv)};
  std::string line;
  bool first = true;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ls(line);
    std::string f;
    while (std::getline(ls, f, ',')) fields.push_back(trim(f));
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    if (first && !fields.empty() && fields[0] == "sample_id") {
      first = false;
      continue;
    }
    first = false;
    if (fields.size() == 2) fields.emplace_back();
    if (fields.size() != 3) {
      throw AnalysisError("line " + std::to_string(lineno) + ": expected sample_id,true_labels,predicted_labels");
    }
    samples.push_back(MLCMSample{split_labels(fields[1]), split_labels(fields[2])});
  }
  return samples;
}

}  // namespace benchforge
