#include "benchforge/suite_config.hpp"

#include <fnmatch.h>
#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

namespace benchforge {

namespace {

constexpr std::array<std::string_view, 4> kTopLevelKeys = {"suite", "defaults", "targets",
                                                           "benchmarks"};
constexpr std::array<std::string_view, 3> kDefaultsKeys = {"obs_min", "obs_max", "timeout_s"};
constexpr std::array<std::string_view, 13> kBenchKeys = {
    "name",        "weight",       "enabled", "scale",   "install_cmd", "prepare_cmd", "run_cmd",
    "env",         "unit_of_work", "obs_min", "obs_max", "timeout_s",   "tags"};
constexpr std::array<std::string_view, 5> kTagKeys = {"domains", "architectures", "model_size",
                                                      "parallelism", "libraries"};

// Placeholders accepted in command templates.
const std::map<std::string, std::string>& placeholder_probe() {
  static const std::map<std::string, std::string> vars = {
      {"device_id", "0"}, {"device_count", "1"}, {"rank", "0"},
      {"world_size", "1"}, {"base_dir", "/"},    {"bench_dir", "/"}};
  return vars;
}

template <std::size_t N>
bool contains(const std::array<std::string_view, N>& keys, std::string_view key) {
  for (auto k : keys) {
    if (k == key) return true;
  }
  return false;
}

std::string where(const YAML::Node& node) {
  const auto mark = node.Mark();
  if (mark.is_null()) return {};
  return " (line " + std::to_string(mark.line + 1) + ", column " +
         std::to_string(mark.column + 1) + ")";
}

template <std::size_t N>
void reject_unknown_keys(const YAML::Node& map, const std::array<std::string_view, N>& allowed,
                         const std::string& context) {
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (!contains(allowed, key)) {
      throw ConfigError("unknown key '" + key + "' in " + context + where(kv.first));
    }
  }
}

template <typename T>
T scalar_as(const YAML::Node& node, const std::string& context) {
  if (!node.IsScalar()) {
    throw ConfigError(context + ": expected a scalar value" + where(node));
  }
  try {
    return node.as<T>();
  } catch (const YAML::BadConversion&) {
    throw ConfigError(context + ": invalid value '" + node.Scalar() + "'" + where(node));
  }
}

std::set<std::string> label_set(const YAML::Node& node, const std::string& context) {
  std::set<std::string> out;
  if (!node || node.IsNull()) return out;
  if (node.IsScalar()) {
    out.insert(node.as<std::string>());
    return out;
  }
  if (!node.IsSequence()) {
    throw ConfigError(context + ": expected a list of labels" + where(node));
  }
  for (const auto& item : node) out.insert(scalar_as<std::string>(item, context));
  return out;
}

TaxonomyTags parse_tags(const YAML::Node& node, const std::string& bench) {
  TaxonomyTags tags;
  if (!node || node.IsNull()) return tags;
  const std::string ctx = "tags of benchmark '" + bench + "'";
  if (!node.IsMap()) throw ConfigError(ctx + ": expected a mapping" + where(node));
  reject_unknown_keys(node, kTagKeys, ctx);
  tags.domains = label_set(node["domains"], ctx + ".domains");
  tags.architectures = label_set(node["architectures"], ctx + ".architectures");
  if (const auto size = node["model_size"]; size && !size.IsNull()) {
    tags.model_size_class = scalar_as<std::string>(size, ctx + ".model_size");
  }
  tags.parallelism = label_set(node["parallelism"], ctx + ".parallelism");
  tags.libraries = label_set(node["libraries"], ctx + ".libraries");
  return tags;
}

BenchmarkSpec parse_benchmark(const YAML::Node& node, const BenchmarkDefaults& defaults,
                              std::size_t index) {
  const std::string idx_ctx = "benchmarks[" + std::to_string(index) + "]";
  if (!node.IsMap()) throw ConfigError(idx_ctx + ": expected a mapping" + where(node));
  reject_unknown_keys(node, kBenchKeys, idx_ctx);

  BenchmarkSpec spec;
  if (!node["name"]) throw ConfigError(idx_ctx + ": missing name" + where(node));
  spec.name = scalar_as<std::string>(node["name"], idx_ctx + ".name");
  const std::string ctx = "benchmark '" + spec.name + "'";

  spec.obs_min = defaults.obs_min;
  spec.obs_max = defaults.obs_max;
  spec.timeout_s = defaults.timeout_s;

  if (const auto n = node["weight"]) spec.weight = scalar_as<double>(n, ctx + ".weight");
  if (const auto n = node["enabled"]) spec.enabled = scalar_as<bool>(n, ctx + ".enabled");
  if (const auto n = node["scale"]) {
    const auto text = scalar_as<std::string>(n, ctx + ".scale");
    const auto mode = parse_scale_mode(text);
    if (!mode) throw ConfigError(ctx + ": unknown scale mode '" + text + "'" + where(n));
    spec.scale = *mode;
  }
  if (const auto n = node["install_cmd"]) spec.install_cmd = scalar_as<std::string>(n, ctx);
  if (const auto n = node["prepare_cmd"]) spec.prepare_cmd = scalar_as<std::string>(n, ctx);
  if (const auto n = node["run_cmd"]) spec.run_cmd = scalar_as<std::string>(n, ctx);
  if (spec.run_cmd.empty()) throw ConfigError(ctx + ": missing run_cmd" + where(node));
  if (const auto n = node["env"]; n && !n.IsNull()) {
    if (!n.IsMap()) throw ConfigError(ctx + ".env: expected a mapping" + where(n));
    for (const auto& kv : n) {
      spec.env[kv.first.as<std::string>()] = scalar_as<std::string>(kv.second, ctx + ".env");
    }
  }
  if (const auto n = node["unit_of_work"]) spec.unit_of_work = scalar_as<std::string>(n, ctx);
  if (const auto n = node["obs_min"]) spec.obs_min = scalar_as<int>(n, ctx + ".obs_min");
  if (const auto n = node["obs_max"]) spec.obs_max = scalar_as<int>(n, ctx + ".obs_max");
  if (const auto n = node["timeout_s"]) spec.timeout_s = scalar_as<double>(n, ctx + ".timeout_s");
  spec.tags = parse_tags(node["tags"], spec.name);
  return spec;
}

CoverageTargets parse_targets(const YAML::Node& node) {
  CoverageTargets targets;
  if (!node.IsMap()) throw ConfigError("targets: expected a mapping" + where(node));
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    const auto dim = parse_dimension(key);
    if (!dim) throw ConfigError("unknown key '" + key + "' in targets" + where(kv.first));
    if (!kv.second.IsMap()) {
      throw ConfigError("targets." + key + ": expected a mapping" + where(kv.second));
    }
    auto& column = targets.by_dimension[*dim];
    for (const auto& entry : kv.second) {
      column[entry.first.as<std::string>()] =
          scalar_as<double>(entry.second, "targets." + key);
    }
  }
  return targets;
}

std::string format_number(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  (void)ec;
  return std::string(buf, end);
}

void emit_labels(YAML::Emitter& out, const char* key, const std::set<std::string>& labels) {
  out << YAML::Key << key << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (const auto& l : labels) out << l;
  out << YAML::EndSeq;
}

bool glob_match(const std::string& pattern, const std::string& text) {
  return ::fnmatch(pattern.c_str(), text.c_str(), 0) == 0;
}

bool filter_matches(const BenchmarkSpec& spec, const std::string& key, const std::string& value) {
  if (key == "scale") return glob_match(value, std::string(to_string(spec.scale)));
  const auto dim = parse_dimension(key);
  for (const auto& label : spec.tags.labels(*dim)) {
    if (glob_match(value, label)) return true;
  }
  return false;
}

}  // namespace

std::string_view to_string(ScaleMode mode) {
  switch (mode) {
    case ScaleMode::SingleDevice:
      return "single-device";
    case ScaleMode::NodeDevices:
      return "node-devices";
    case ScaleMode::MultiNode:
      return "multi-node";
  }
  return "unknown";
}

std::optional<ScaleMode> parse_scale_mode(std::string_view text) {
  if (text == "single-device") return ScaleMode::SingleDevice;
  if (text == "node-devices") return ScaleMode::NodeDevices;
  if (text == "multi-node") return ScaleMode::MultiNode;
  return std::nullopt;
}

std::string_view to_string(Dimension dim) {
  switch (dim) {
    case Dimension::Domains:
      return "domains";
    case Dimension::Architectures:
      return "architectures";
    case Dimension::ModelSize:
      return "model_size";
    case Dimension::Parallelism:
      return "parallelism";
    case Dimension::Libraries:
      return "libraries";
  }
  return "unknown";
}

std::optional<Dimension> parse_dimension(std::string_view text) {
  if (text == "domains" || text == "domain") return Dimension::Domains;
  if (text == "architectures" || text == "architecture" || text == "arch") {
    return Dimension::Architectures;
  }
  if (text == "model_size" || text == "size") return Dimension::ModelSize;
  if (text == "parallelism") return Dimension::Parallelism;
  if (text == "libraries" || text == "library") return Dimension::Libraries;
  return std::nullopt;
}

bool TaxonomyTags::empty() const {
  return domains.empty() && architectures.empty() && model_size_class.empty() &&
         parallelism.empty() && libraries.empty();
}

std::set<std::string> TaxonomyTags::labels(Dimension dim) const {
  switch (dim) {
    case Dimension::Domains:
      return domains;
    case Dimension::Architectures:
      return architectures;
    case Dimension::ModelSize:
      if (model_size_class.empty()) return {};
      return {model_size_class};
    case Dimension::Parallelism:
      return parallelism;
    case Dimension::Libraries:
      return libraries;
  }
  return {};
}

const BenchmarkSpec* SuiteConfig::find(std::string_view name) const {
  for (const auto& b : benchmarks) {
    if (b.name == name) return &b;
  }
  return nullptr;
}

SuiteConfig parse_suite(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ConfigError("YAML syntax error at line " + std::to_string(e.mark.line + 1) +
                      ", column " + std::to_string(e.mark.column + 1) + ": " + e.msg);
  }
  if (!root.IsMap()) throw ConfigError("suite document must be a mapping");
  reject_unknown_keys(root, kTopLevelKeys, "suite document");

  SuiteConfig cfg;
  if (const auto n = root["suite"]) cfg.suite_name = scalar_as<std::string>(n, "suite");

  if (const auto n = root["defaults"]; n && !n.IsNull()) {
    if (!n.IsMap()) throw ConfigError("defaults: expected a mapping" + where(n));
    reject_unknown_keys(n, kDefaultsKeys, "defaults");
    if (const auto v = n["obs_min"]) cfg.defaults.obs_min = scalar_as<int>(v, "defaults.obs_min");
    if (const auto v = n["obs_max"]) cfg.defaults.obs_max = scalar_as<int>(v, "defaults.obs_max");
    if (const auto v = n["timeout_s"]) {
      cfg.defaults.timeout_s = scalar_as<double>(v, "defaults.timeout_s");
    }
  }

  if (const auto n = root["targets"]; n && !n.IsNull()) cfg.targets = parse_targets(n);

  const auto benches = root["benchmarks"];
  if (!benches || benches.IsNull() || (benches.IsSequence() && benches.size() == 0)) {
    throw ConfigError("suite must declare at least one benchmark");
  }
  if (!benches.IsSequence()) throw ConfigError("benchmarks: expected a list" + where(benches));

  std::set<std::string> seen;
  for (std::size_t i = 0; i < benches.size(); ++i) {
    auto spec = parse_benchmark(benches[i], cfg.defaults, i);
    if (!seen.insert(spec.name).second) {
      throw ConfigError("duplicate benchmark name '" + spec.name + "'" + where(benches[i]));
    }
    cfg.benchmarks.push_back(std::move(spec));
  }
  return cfg;
}

SuiteConfig load_suite(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read suite file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_suite(buf.str());
}

std::string render_suite(const SuiteConfig& cfg) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "suite" << YAML::Value << YAML::DoubleQuoted << cfg.suite_name;

  out << YAML::Key << "defaults" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "obs_min" << YAML::Value << cfg.defaults.obs_min;
  out << YAML::Key << "obs_max" << YAML::Value << cfg.defaults.obs_max;
  out << YAML::Key << "timeout_s" << YAML::Value << format_number(cfg.defaults.timeout_s);
  out << YAML::EndMap;

  if (cfg.targets) {
    out << YAML::Key << "targets" << YAML::Value << YAML::BeginMap;
    for (const auto& [dim, column] : cfg.targets->by_dimension) {
      out << YAML::Key << std::string(to_string(dim)) << YAML::Value << YAML::BeginMap;
      for (const auto& [label, value] : column) {
        out << YAML::Key << YAML::DoubleQuoted << label << YAML::Value << format_number(value);
      }
      out << YAML::EndMap;
    }
    out << YAML::EndMap;
  }

  out << YAML::Key << "benchmarks" << YAML::Value << YAML::BeginSeq;
  for (const auto& b : cfg.benchmarks) {
    out << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << YAML::DoubleQuoted << b.name;
    out << YAML::Key << "weight" << YAML::Value << format_number(b.weight);
    out << YAML::Key << "enabled" << YAML::Value << b.enabled;
    out << YAML::Key << "scale" << YAML::Value << std::string(to_string(b.scale));
    out << YAML::Key << "install_cmd" << YAML::Value << YAML::DoubleQuoted << b.install_cmd;
    out << YAML::Key << "prepare_cmd" << YAML::Value << YAML::DoubleQuoted << b.prepare_cmd;
    out << YAML::Key << "run_cmd" << YAML::Value << YAML::DoubleQuoted << b.run_cmd;
    out << YAML::Key << "env" << YAML::Value << YAML::BeginMap;
    for (const auto& [k, v] : b.env) {
      out << YAML::Key << YAML::DoubleQuoted << k << YAML::Value << YAML::DoubleQuoted << v;
    }
    out << YAML::EndMap;
    out << YAML::Key << "unit_of_work" << YAML::Value << YAML::DoubleQuoted << b.unit_of_work;
    out << YAML::Key << "obs_min" << YAML::Value << b.obs_min;
    out << YAML::Key << "obs_max" << YAML::Value << b.obs_max;
    out << YAML::Key << "timeout_s" << YAML::Value << format_number(b.timeout_s);
    out << YAML::Key << "tags" << YAML::Value << YAML::BeginMap;
    emit_labels(out, "domains", b.tags.domains);
    emit_labels(out, "architectures", b.tags.architectures);
    out << YAML::Key << "model_size" << YAML::Value << YAML::DoubleQuoted
        << b.tags.model_size_class;
    emit_labels(out, "parallelism", b.tags.parallelism);
    emit_labels(out, "libraries", b.tags.libraries);
    out << YAML::EndMap;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::string suite_hash(const SuiteConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : render_suite(cfg)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<std::string> validate_suite(const SuiteConfig& cfg) {
  std::vector<std::string> violations;
  if (cfg.benchmarks.empty()) violations.push_back("suite: at least one benchmark is required");

  std::set<std::string> names;
  double enabled_weight = 0.0;
  for (const auto& b : cfg.benchmarks) {
    const std::string who = "benchmark '" + b.name + "'";
    if (b.name.empty()) violations.push_back("benchmark with empty name");
    if (!names.insert(b.name).second) violations.push_back(who + ": name: duplicate");
    if (!std::isfinite(b.weight) || b.weight < 0) {
      violations.push_back(who + ": weight: must be >= 0 (got " + format_number(b.weight) + ")");
    }
    if (b.obs_min <= 0) violations.push_back(who + ": obs_min: must be positive");
    if (b.obs_max <= 0) violations.push_back(who + ": obs_max: must be positive");
    if (b.obs_min > b.obs_max) {
      violations.push_back(who + ": obs_min/obs_max: obs_min <= obs_max violated (" +
                           std::to_string(b.obs_min) + " > " + std::to_string(b.obs_max) + ")");
    }
    if (!(b.timeout_s > 0)) violations.push_back(who + ": timeout_s: must be positive");
    if (b.run_cmd.empty()) violations.push_back(who + ": run_cmd: must not be empty");
    for (const auto* field : {&b.install_cmd, &b.prepare_cmd, &b.run_cmd}) {
      try {
        expand_template(*field, placeholder_probe());
      } catch (const ConfigError& e) {
        violations.push_back(who + ": command template: " + e.what());
      }
    }
    if (b.enabled && std::isfinite(b.weight) && b.weight > 0) enabled_weight += b.weight;
  }
  if (!cfg.benchmarks.empty() && !(enabled_weight > 0)) {
    violations.push_back("suite: total weight of enabled benchmarks must be > 0");
  }

  if (cfg.targets) {
    for (const auto& [dim, column] : cfg.targets->by_dimension) {
      double sum = 0.0;
      for (const auto& [label, value] : column) {
        if (!(value >= 0.0 && value <= 1.0)) {
          violations.push_back("targets." + std::string(to_string(dim)) + "." + label +
                               ": proportion must be in [0, 1]");
        }
        sum += value;
      }
      if (dim == Dimension::ModelSize && !column.empty() && std::abs(sum - 1.0) > 1e-9) {
        violations.push_back("targets.model_size: proportions must sum to 1 (got " +
                             format_number(sum) + ")");
      }
    }
  }
  return violations;
}

Selector parse_selector(std::string_view text) {
  Selector sel;
  std::string term;
  auto flush = [&] {
    if (term.empty()) return;
    const auto eq = term.find('=');
    if (eq == std::string::npos) {
      sel.name_patterns.push_back(term);
    } else {
      auto key = term.substr(0, eq);
      auto value = term.substr(eq + 1);
      if (value.empty()) throw ConfigError("selector term '" + term + "' has an empty value");
      if (key == "name") {
        sel.name_patterns.push_back(value);
      } else if (key == "scale" || parse_dimension(key)) {
        sel.filters.emplace_back(key, value);
      } else {
        throw ConfigError("unknown selector key '" + key + "'");
      }
    }
    term.clear();
  };
  for (char c : text) {
    if (c == ',' || c == ' ' || c == '\t' || c == '\n') {
      flush();
    } else {
      term.push_back(c);
    }
  }
  flush();
  if (sel.name_patterns.empty() && sel.filters.empty()) {
    throw ConfigError("empty selector");
  }
  return sel;
}

SuiteConfig select_benchmarks(const SuiteConfig& cfg, const Selector& selector) {
  SuiteConfig out = cfg;
  out.benchmarks.clear();
  for (const auto& b : cfg.benchmarks) {
    if (!b.enabled) continue;
    bool name_ok = selector.name_patterns.empty();
    for (const auto& p : selector.name_patterns) {
      if (glob_match(p, b.name)) {
        name_ok = true;
        break;
      }
    }
    if (!name_ok) continue;
    bool filters_ok = true;
    for (const auto& [key, value] : selector.filters) {
      if (!filter_matches(b, key, value)) {
        filters_ok = false;
        break;
      }
    }
    if (filters_ok) out.benchmarks.push_back(b);
  }
  if (out.benchmarks.empty()) throw ConfigError("selector matched no enabled benchmark");
  return out;
}

std::string expand_template(std::string_view tmpl,
                            const std::map<std::string, std::string>& vars) {
  std::string out;
  out.reserve(tmpl.size());
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    const char c = tmpl[i];
    if (c == '{' && i + 1 < tmpl.size() && tmpl[i + 1] == '{') {
      out.push_back('{');
      ++i;
    } else if (c == '}' && i + 1 < tmpl.size() && tmpl[i + 1] == '}') {
      out.push_back('}');
      ++i;
    } else if (c == '{') {
      const auto close = tmpl.find('}', i);
      if (close == std::string_view::npos) {
        throw ConfigError("unterminated placeholder in '" + std::string(tmpl) + "'");
      }
      const std::string key(tmpl.substr(i + 1, close - i - 1));
      const auto it = vars.find(key);
      if (it == vars.end()) throw ConfigError("unknown placeholder {" + key + "}");
      out += it->second;
      i = close;
    } else {
      out.push_back(c);
    }
  }
  return out;
}

}  // namespace benchforge
