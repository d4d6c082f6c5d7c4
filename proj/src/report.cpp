#include "benchforge/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <set>
#include <sstream>

namespace benchforge {

namespace {

using nlohmann::json;

constexpr std::string_view kGlobalRow = "Global Score";

std::string fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  return buf;
}

std::string exact(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  (void)ec;
  return std::string(buf, end);
}

std::string exact(const std::optional<double>& value) { return value ? exact(*value) : std::string(); }

double parse_double(const std::string& text) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0') throw ReportError("invalid number '" + text + "'");
  return v;
}

std::optional<double> parse_optional(const std::string& text) {
  if (text.empty()) return std::nullopt;
  return parse_double(text);
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  if (text.empty()) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

std::string join_list(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ',';
    out += items[i];
  }
  return out;
}

std::string pad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string rtrim(std::string s) {
  while (!s.empty() && s.back() == ' ') s.pop_back();
  return s;
}

}  // namespace

std::optional<ReportFormat> parse_report_format(std::string_view text) {
  if (text == "text") return ReportFormat::Text;
  if (text == "csv") return ReportFormat::Csv;
  if (text == "json") return ReportFormat::Json;
  return std::nullopt;
}

std::string humanize(double value) {
  if (!std::isfinite(value)) return exact(value);
  const double mag = std::abs(value);
  if (mag < 1e3) {
    auto s = fixed(value, 1);
    if (std::abs(parse_double(s)) < 1e3) return s;
  }
  if (mag < 1e6) {
    auto s = fixed(value / 1e3, 1);
    if (std::abs(parse_double(s)) < 1e3) return s + "K";
  }
  return fixed(value / 1e6, 1) + "M";
}

double parse_humanized(std::string_view text) {
  std::string s(text);
  double scale = 1.0;
  if (!s.empty() && (s.back() == 'K' || s.back() == 'k')) {
    scale = 1e3;
    s.pop_back();
  } else if (!s.empty() && s.back() == 'M') {
    scale = 1e6;
    s.pop_back();
  }
  return parse_double(s) * scale;
}

ReportDocument render_report(const std::vector<SystemResults>& systems,
                             const std::optional<std::string>& baseline,
                             std::map<std::string, std::string> metadata) {
  if (systems.empty()) throw ReportError("no systems to report");

  std::set<std::string> names;
  for (const auto& s : systems) {
    if (!names.insert(s.name).second) throw ReportError("duplicate system name '" + s.name + "'");
    if (s.suite_hash != systems.front().suite_hash) {
      throw ReportError("systems were run from different suites ('" + systems.front().name +
                        "' vs '" + s.name + "')");
    }
  }

  std::size_t base_index = 0;
  if (baseline) {
    bool found = false;
    for (std::size_t i = 0; i < systems.size(); ++i) {
      if (systems[i].name == *baseline) {
        base_index = i;
        found = true;
      }
    }
    if (!found) throw ReportError("baseline '" + *baseline + "' is not among the reported systems");
  }

  ReportDocument doc;
  doc.baseline = baseline;
  doc.metadata = std::move(metadata);
  if (!systems.front().suite_hash.empty()) doc.metadata["suite_hash"] = systems.front().suite_hash;
  for (const auto& s : systems) doc.systems.push_back(s.name);

  // Row order: the anchor system first, then anything only others have.
  std::vector<std::pair<std::string, double>> order;
  std::set<std::string> seen;
  auto add_rows = [&](const SystemResults& s) {
    for (const auto& r : s.results) {
      if (seen.insert(r.bench).second) order.emplace_back(r.bench, r.weight);
    }
  };
  add_rows(systems[base_index]);
  for (const auto& s : systems) add_rows(s);

  auto lookup = [](const SystemResults& s, const std::string& bench) -> const BenchResult* {
    for (const auto& r : s.results) {
      if (r.bench == bench) return &r;
    }
    return nullptr;
  };

  std::vector<std::vector<BenchResult>> scoring(systems.size());
  for (const auto& [bench, weight] : order) {
    ReportRow row;
    row.bench = bench;
    row.weight = weight;
    const BenchResult* base = baseline ? lookup(systems[base_index], bench) : nullptr;
    for (std::size_t i = 0; i < systems.size(); ++i) {
      ReportCell cell;
      const BenchResult* r = lookup(systems[i], bench);
      if (r) {
        cell.success_rate = r->success_rate;
        if (r->success_rate > 0.0 && r->perf > 0.0) cell.perf = r->perf;
        if (base) cell.ratio = ratio_to_baseline(*r, *base).ratio;
        scoring[i].push_back(*r);
      } else {
        scoring[i].push_back(BenchResult{bench, weight, 0.0, 0.0, 0, {}});
      }
      row.cells.push_back(cell);
    }
    doc.rows.push_back(std::move(row));
  }

  for (std::size_t i = 0; i < systems.size(); ++i) {
    GlobalCell g;
    try {
      const auto score = suite_score(scoring[i]);
      g.score = score.score;
      g.total_weight = score.total_weight;
    } catch (const ScoreError&) {
    }
    doc.global.push_back(g);
  }
  if (baseline) {
    const auto& base = doc.global[base_index];
    for (auto& g : doc.global) {
      if (g.score && base.score && *base.score > 0.0) g.ratio = *g.score / *base.score;
    }
  }
  return doc;
}

std::vector<SystemResults> fold_runs(const std::vector<LoadedRun>& runs, bool drop_warmup) {
  std::vector<SystemResults> out;
  for (const auto& run : runs) {
    SystemResults sys;
    sys.name = run.system;
    sys.suite_hash = run.suite_hash;
    for (const auto& record : run.records) {
      const auto* spec = run.suite.find(record.bench);
      if (!spec) throw ReportError("run " + run.run_dir.string() + " has unknown bench '" + record.bench + "'");
      sys.results.push_back(fold_bench(*spec, record, drop_warmup));
    }
    out.push_back(std::move(sys));
  }
  return out;
}

std::string to_text(const ReportDocument& doc) {
  std::vector<std::size_t> ratio_cols;
  if (doc.baseline) {
    for (std::size_t i = 0; i < doc.systems.size(); ++i) {
      if (doc.systems[i] != *doc.baseline) ratio_cols.push_back(i);
    }
  }

  std::vector<std::string> header{"bench"};
  for (auto i : ratio_cols) header.push_back(doc.systems[i]);
  for (const auto& s : doc.systems) header.push_back(s);

  std::vector<std::vector<std::string>> body;
  for (const auto& row : doc.rows) {
    std::vector<std::string> line{row.bench};
    for (auto i : ratio_cols) line.push_back(row.cells[i].ratio ? fixed(*row.cells[i].ratio, 2) : "");
    for (const auto& cell : row.cells) line.push_back(cell.perf ? humanize(*cell.perf) : "");
    body.push_back(std::move(line));
  }
  std::vector<std::string> total{std::string(kGlobalRow)};
  for (auto i : ratio_cols) total.push_back(doc.global[i].ratio ? fixed(*doc.global[i].ratio, 2) : "");
  for (const auto& g : doc.global) total.push_back(g.score ? fixed(*g.score, 1) : "");

  std::vector<std::size_t> width(header.size(), 0);
  auto widen = [&](const std::vector<std::string>& line) {
    for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
  };
  widen(header);
  for (const auto& line : body) widen(line);
  widen(total);

  auto format_line = [&](const std::vector<std::string>& line) {
    std::string out = pad_right(line[0], width[0]);
    for (std::size_t c = 1; c < line.size(); ++c) out += " | " + pad_left(line[c], width[c]);
    return rtrim(out) + "\n";
  };
  auto rule = [&] {
    std::string out = std::string(width[0], '-');
    for (std::size_t c = 1; c < width.size(); ++c) out += "-+-" + std::string(width[c], '-');
    return out + "\n";
  };

  std::string out;
  if (!ratio_cols.empty()) {
    std::vector<std::string> ratio_names;
    for (auto i : ratio_cols) ratio_names.push_back(doc.systems[i]);
    std::string perf_names;
    for (std::size_t i = 0; i < doc.systems.size(); ++i) perf_names += (i ? ", " : "") + doc.systems[i];
    std::string ratio_list;
    for (std::size_t i = 0; i < ratio_names.size(); ++i) ratio_list += (i ? ", " : "") + ratio_names[i];
    out += "Ratio with " + *doc.baseline + ": " + ratio_list + " | Performance: " + perf_names + "\n";
  }
  out += format_line(header);
  out += rule();
  for (const auto& line : body) out += format_line(line);
  out += rule();
  out += format_line(total);
  return out;
}

std::string to_csv(const ReportDocument& doc) {
  std::string out;
  out += "# systems=" + join_list(doc.systems) + "\n";
  if (doc.baseline) out += "# baseline=" + *doc.baseline + "\n";
  for (const auto& [k, v] : doc.metadata) out += "# " + k + "=" + v + "\n";

  out += "bench,weight,perf,success_rate";
  if (doc.baseline) out += ",ratio_vs_" + *doc.baseline;
  out += ",system\n";

  for (const auto& row : doc.rows) {
    for (std::size_t i = 0; i < doc.systems.size(); ++i) {
      const auto& cell = row.cells[i];
      out += csv_field(row.bench) + "," + exact(row.weight) + "," + exact(cell.perf) + "," +
             exact(cell.success_rate);
      if (doc.baseline) out += "," + exact(cell.ratio);
      out += "," + csv_field(doc.systems[i]) + "\n";
    }
  }
  for (std::size_t i = 0; i < doc.systems.size(); ++i) {
    const auto& g = doc.global[i];
    out += std::string(kGlobalRow) + "," + exact(g.total_weight) + "," + exact(g.score) + ",";
    if (doc.baseline) out += "," + exact(g.ratio);
    out += "," + csv_field(doc.systems[i]) + "\n";
  }
  return out;
}

json to_json(const ReportDocument& doc) {
  json j;
  j["systems"] = doc.systems;
  j["baseline"] = doc.baseline ? json(*doc.baseline) : json(nullptr);
  j["metadata"] = doc.metadata;
  j["rows"] = json::array();
  for (const auto& row : doc.rows) {
    json r{{"bench", row.bench}, {"weight", row.weight}, {"results", json::object()}};
    for (std::size_t i = 0; i < doc.systems.size(); ++i) {
      const auto& c = row.cells[i];
      r["results"][doc.systems[i]] = {{"perf", optional_json(c.perf)},
                                      {"success_rate", optional_json(c.success_rate)},
                                      {"ratio", optional_json(c.ratio)}};
    }
    j["rows"].push_back(std::move(r));
  }
  j["global"] = json::object();
  for (std::size_t i = 0; i < doc.systems.size(); ++i) {
    const auto& g = doc.global[i];
    j["global"][doc.systems[i]] = {{"score", optional_json(g.score)},
                                   {"total_weight", g.total_weight},
                                   {"ratio", optional_json(g.ratio)}};
  }
  return j;
}

std::string serialize(const ReportDocument& doc, ReportFormat format) {
  switch (format) {
    case ReportFormat::Text:
      return to_text(doc);
    case ReportFormat::Csv:
      return to_csv(doc);
    case ReportFormat::Json:
      return to_json(doc).dump(2) + "\n";
  }
  return {};
}

ReportDocument parse_csv(std::string_view csv) {
  ReportDocument doc;
  std::stringstream in{std::string(csv)};
  std::string line;
  bool header_seen = false;
  std::map<std::string, std::size_t> system_index;
  std::map<std::string, std::size_t> row_index;

  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const auto key = line.substr(2, eq - 2);
      const auto value = line.substr(eq + 1);
      if (key == "systems") {
        doc.systems = split_list(value);
        for (std::size_t i = 0; i < doc.systems.size(); ++i) system_index[doc.systems[i]] = i;
        doc.global.assign(doc.systems.size(), GlobalCell{});
      } else if (key == "baseline") {
        doc.baseline = value;
      } else {
        doc.metadata[key] = value;
      }
      continue;
    }
    const auto fields = split_csv_line(line);
    if (!header_seen) {
      header_seen = true;
      const std::size_t expected = doc.baseline ? 6 : 5;
      if (fields.size() != expected || fields[0] != "bench") throw ReportError("unexpected CSV header: " + line);
      continue;
    }
    const bool with_ratio = doc.baseline.has_value();
    if (fields.size() != (with_ratio ? 6u : 5u)) throw ReportError("malformed CSV row: " + line);
    const auto& system = fields.back();
    const auto sys = system_index.find(system);
    if (sys == system_index.end()) throw ReportError("CSV row for undeclared system '" + system + "'");
    const std::optional<double> ratio = with_ratio ? parse_optional(fields[4]) : std::nullopt;

    if (fields[0] == kGlobalRow) {
      auto& g = doc.global[sys->second];
      g.total_weight = parse_double(fields[1]);
      g.score = parse_optional(fields[2]);
      g.ratio = ratio;
      continue;
    }
    auto [it, inserted] = row_index.emplace(fields[0], doc.rows.size());
    if (inserted) {
      ReportRow row;
      row.bench = fields[0];
      row.weight = parse_double(fields[1]);
      row.cells.assign(doc.systems.size(), ReportCell{});
      doc.rows.push_back(std::move(row));
    }
    auto& cell = doc.rows[it->second].cells[sys->second];
    cell.perf = parse_optional(fields[2]);
    cell.success_rate = parse_optional(fields[3]);
    cell.ratio = ratio;
  }
  if (!header_seen) throw ReportError("CSV has no header row");
  return doc;
}

}  // namespace benchforge
