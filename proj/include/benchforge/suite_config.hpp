#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace benchforge {

/// Raised for documents that cannot be turned into a SuiteConfig at all
/// (syntax errors, unknown keys, structural violations). Value-level
/// problems such as a negative weight are reported by validate_suite().
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ScaleMode { SingleDevice, NodeDevices, MultiNode };

std::string_view to_string(ScaleMode mode);
std::optional<ScaleMode> parse_scale_mode(std::string_view text);

/// The five design dimensions a benchmark is classified along.
enum class Dimension { Domains, Architectures, ModelSize, Parallelism, Libraries };

inline constexpr std::array<Dimension, 5> kAllDimensions = {
    Dimension::Domains, Dimension::Architectures, Dimension::ModelSize,
    Dimension::Parallelism, Dimension::Libraries};

std::string_view to_string(Dimension dim);
std::optional<Dimension> parse_dimension(std::string_view text);

struct TaxonomyTags {
  std::set<std::string> domains;
  std::set<std::string> architectures;
  // Model sizes are mutually exclusive, hence a single label.
  std::string model_size_class;
  std::set<std::string> parallelism;
  std::set<std::string> libraries;

  bool empty() const;
  /// Labels carried for one dimension (0..1 for ModelSize).
  std::set<std::string> labels(Dimension dim) const;

  bool operator==(const TaxonomyTags&) const = default;
};

struct BenchmarkDefaults {
  int obs_min = 30;
  int obs_max = 60;
  double timeout_s = 300.0;

  bool operator==(const BenchmarkDefaults&) const = default;
};

struct BenchmarkSpec {
  std::string name;
  double weight = 1.0;
  bool enabled = true;
  ScaleMode scale = ScaleMode::SingleDevice;
  std::string install_cmd;
  std::string prepare_cmd;
  std::string run_cmd;
  std::map<std::string, std::string> env;
  std::string unit_of_work;
  int obs_min = 30;
  int obs_max = 60;
  double timeout_s = 300.0;
  TaxonomyTags tags;

  bool operator==(const BenchmarkSpec&) const = default;
};

struct CoverageTargets {
  std::map<Dimension, std::map<std::string, double>> by_dimension;

  bool operator==(const CoverageTargets&) const = default;
};

struct SuiteConfig {
  std::string suite_name;
  BenchmarkDefaults defaults;
  std::vector<BenchmarkSpec> benchmarks;
  std::optional<CoverageTargets> targets;

  const BenchmarkSpec* find(std::string_view name) const;

  bool operator==(const SuiteConfig&) const = default;
};

SuiteConfig parse_suite(std::string_view text);
SuiteConfig load_suite(const std::filesystem::path& path);

/// Canonical YAML rendering; parse_suite(render_suite(c)) == c.
std::string render_suite(const SuiteConfig& cfg);

/// Stable 64-bit FNV-1a hex digest of the canonical rendering.
std::string suite_hash(const SuiteConfig& cfg);

/// Empty iff every value invariant holds. Each entry names bench and field.
std::vector<std::string> validate_suite(const SuiteConfig& cfg);

/// Benchmark selector.
///
/// Terms are separated by commas or whitespace. A bare term or `name=GLOB`
/// is a name pattern; `domain=`, `arch=`, `size=`, `parallelism=`,
/// `library=` and `scale=` are tag filters. `*` matches everything. A
/// benchmark is selected when it matches any name pattern (if any were
/// given) and every tag filter.
struct Selector {
  std::vector<std::string> name_patterns;
  std::vector<std::pair<std::string, std::string>> filters;
};

Selector parse_selector(std::string_view text);
SuiteConfig select_benchmarks(const SuiteConfig& cfg, const Selector& selector);
inline SuiteConfig select_benchmarks(const SuiteConfig& cfg, std::string_view selector) {
  return select_benchmarks(cfg, parse_selector(selector));
}

/// Replaces `{key}` with vars.at(key). Unknown placeholders throw ConfigError;
/// `{{` and `}}` produce literal braces.
std::string expand_template(std::string_view tmpl,
                            const std::map<std::string, std::string>& vars);

}  // namespace benchforge
