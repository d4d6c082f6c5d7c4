#include "benchforge/protocol.hpp"

#include <array>
#include <cmath>

namespace benchforge {

namespace {

using nlohmann::json;

constexpr std::array<std::pair<EventKind, std::string_view>, 11> kKindNames = {{
    {EventKind::Config, "config"},
    {EventKind::Start, "start"},
    {EventKind::Phase, "phase"},
    {EventKind::Rate, "rate"},
    {EventKind::Loss, "loss"},
    {EventKind::GpuData, "gpudata"},
    {EventKind::Progress, "progress"},
    {EventKind::Success, "success"},
    {EventKind::Error, "error"},
    {EventKind::Stop, "stop"},
    {EventKind::End, "end"},
}};

bool all_finite(const json& j) {
  switch (j.type()) {
    case json::value_t::number_float:
      return std::isfinite(j.get<double>());
    case json::value_t::object:
    case json::value_t::array:
      for (const auto& v : j) {
        if (!all_finite(v)) return false;
      }
      return true;
    default:
      return true;
  }
}

bool positive_number(const json& j) {
  return j.is_number() && j.get<double>() > 0.0;
}

// Reason string when a payload violates its kind's required shape.
std::optional<std::string> payload_problem(EventKind kind, const json& data) {
  if (kind == EventKind::Rate) {
    if (!data.contains("rate") || !positive_number(data["rate"])) {
      return "rate payload needs positive 'rate'";
    }
    if (!data.contains("units") || !data["units"].is_string()) {
      return "rate payload needs string 'units'";
    }
    if (!data.contains("batch") || !positive_number(data["batch"])) {
      return "rate payload needs positive 'batch'";
    }
    if (data.contains("elapsed") && !positive_number(data["elapsed"])) {
      return "rate payload 'elapsed' must be positive";
    }
  }
  return std::nullopt;
}

bool is_blank(std::string_view s) {
  return s.find_first_not_of(" \t\r") == std::string_view::npos;
}

Rejection reject(std::string_view line, std::string reason) {
  return Rejection{std::string(line), std::move(reason)};
}

}  // namespace

std::string_view to_string(EventKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<EventKind> parse_event_kind(std::string_view text) {
  for (const auto& [k, name] : kKindNames) {
    if (name == text) return k;
  }
  return std::nullopt;
}

std::string encode_event(const MetricEvent& e) {
  if (!std::isfinite(e.time)) throw ProtocolError("event time is not finite");
  if (!e.data.is_object()) throw ProtocolError("event payload must be an object");
  if (!all_finite(e.data)) throw ProtocolError("event payload holds a non-finite number");
  if (auto problem = payload_problem(e.event, e.data)) throw ProtocolError(*problem);
  try {
    std::string line = "{\"event\":";
    line += json(std::string(to_string(e.event))).dump();
    line += ",\"time\":";
    line += json(e.time).dump();
    line += ",\"task\":";
    line += json(e.task).dump();
    line += ",\"data\":";
    line += e.data.dump();
    line += "}\n";
    return line;
  } catch (const json::exception& ex) {
    throw ProtocolError(std::string("payload not serializable: ") + ex.what());
  }
}

DecodeResult decode_event(std::string_view line) {
  std::string_view body = line;
  while (!body.empty() && (body.back() == '\n' || body.back() == '\r')) body.remove_suffix(1);

  json j = json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) return reject(line, "malformed json");
  if (!j.is_object()) return reject(line, "not a json object");

  for (const auto& [key, value] : j.items()) {
    if (key != "event" && key != "time" && key != "task" && key != "data") {
      return reject(line, "unexpected top-level key '" + key + "'");
    }
  }
  if (!j.contains("event") || !j["event"].is_string()) return reject(line, "missing 'event'");
  if (!j.contains("time") || !j["time"].is_number()) return reject(line, "missing 'time'");
  if (!j.contains("task") || !j["task"].is_string()) return reject(line, "missing 'task'");
  if (!j.contains("data") || !j["data"].is_object()) return reject(line, "missing 'data'");

  const auto kind = parse_event_kind(j["event"].get<std::string>());
  if (!kind) return reject(line, "unknown kind");

  MetricEvent e;
  e.event = *kind;
  e.time = j["time"].get<double>();
  if (!std::isfinite(e.time)) return reject(line, "non-finite time");
  e.task = j["task"].get<std::string>();
  e.data = std::move(j["data"]);
  if (!all_finite(e.data)) return reject(line, "non-finite number in payload");
  if (auto problem = payload_problem(e.event, e.data)) return reject(line, *problem);
  return e;
}

MetricEvent make_rate_event(double time, std::string task, double work, double elapsed,
                            std::string units, nlohmann::json extra) {
  if (!(elapsed > 0.0)) throw ProtocolError("rate event needs elapsed > 0");
  if (!(work > 0.0)) throw ProtocolError("rate event needs work > 0");
  MetricEvent e;
  e.event = EventKind::Rate;
  e.time = time;
  e.task = std::move(task);
  e.data = extra.is_object() ? std::move(extra) : json::object();
  e.data["rate"] = work / elapsed;
  e.data["elapsed"] = elapsed;
  e.data["units"] = std::move(units);
  if (work == std::floor(work) && work < 9007199254740992.0) {
    e.data["batch"] = static_cast<std::int64_t>(work);
  } else {
    e.data["batch"] = work;
  }
  return e;
}

std::vector<DecodeResult> LineFramer::feed(std::string_view bytes) {
  std::vector<DecodeResult> out;
  std::size_t start = 0;
  while (true) {
    const auto nl = bytes.find('\n', start);
    if (nl == std::string_view::npos) break;
    if (partial_.empty()) {
      const auto line = bytes.substr(start, nl - start);
      if (!is_blank(line)) out.push_back(decode_event(line));
    } else {
      partial_.append(bytes.substr(start, nl - start));
      if (!is_blank(partial_)) out.push_back(decode_event(partial_));
      partial_.clear();
    }
    start = nl + 1;
  }
  partial_.append(bytes.substr(start));
  return out;
}

std::vector<DecodeResult> LineFramer::finish() {
  std::vector<DecodeResult> out;
  // A final line without newline still counts once the source is exhausted.
  if (!is_blank(partial_)) out.push_back(decode_event(partial_));
  partial_.clear();
  return out;
}

std::vector<StreamItem> read_stream(const ByteSource& source) {
  std::vector<StreamItem> items;
  LineFramer framer;
  auto push_all = [&items](std::vector<DecodeResult>&& results) {
    for (auto& r : results) {
      std::visit([&items](auto&& v) { items.emplace_back(std::move(v)); }, std::move(r));
    }
  };
  while (true) {
    std::optional<std::string> chunk;
    try {
      chunk = source();
    } catch (const std::exception& ex) {
      items.emplace_back(StreamError{ex.what()});
      return items;
    }
    if (!chunk) break;
    push_all(framer.feed(*chunk));
  }
  push_all(framer.finish());
  return items;
}

std::vector<StreamItem> read_stream_text(std::string_view text) {
  bool done = false;
  return read_stream([&]() -> std::optional<std::string> {
    if (done) return std::nullopt;
    done = true;
    return std::string(text);
  });
}

}  // namespace benchforge
