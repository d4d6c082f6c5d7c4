#pragma once

#include <json.hpp>

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace benchforge {

/// Environment variable naming the metric channel handed to a child process.
/// Holds a file descriptor number, or a filesystem path (named pipe / file).
inline constexpr const char* kMetricsFdEnv = "BENCHFORGE_METRICS_FD";

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class EventKind { Config, Start, Phase, Rate, Loss, GpuData, Progress, Success, Error, Stop, End };

std::string_view to_string(EventKind kind);
std::optional<EventKind> parse_event_kind(std::string_view text);

struct MetricEvent {
  EventKind event = EventKind::End;
  double time = 0.0;  // producer-side epoch seconds
  std::string task;
  nlohmann::json data = nlohmann::json::object();

  bool operator==(const MetricEvent&) const = default;
};

/// A line that could not be decoded. Ingestion keeps going past these.
struct Rejection {
  std::string raw;
  std::string reason;

  bool operator==(const Rejection&) const = default;
};

/// Terminal marker emitted when the byte source itself fails.
struct StreamError {
  std::string message;

  bool operator==(const StreamError&) const = default;
};

using DecodeResult = std::variant<MetricEvent, Rejection>;
using StreamItem = std::variant<MetricEvent, Rejection, StreamError>;

/// One JSON object followed by '\n'. Top-level key order is fixed
/// (event, time, task, data); payload keys are sorted.
std::string encode_event(const MetricEvent& e);

/// Accepts a line with or without its trailing newline.
DecodeResult decode_event(std::string_view line);

/// Builds a well-formed `rate` event. elapsed must be > 0.
MetricEvent make_rate_event(double time, std::string task, double work, double elapsed,
                            std::string units, nlohmann::json extra = nlohmann::json::object());

/// Incremental newline framing. Bytes may arrive in arbitrary chunks; a
/// partial trailing line is held until completed or finish() is called.
class LineFramer {
 public:
  std::vector<DecodeResult> feed(std::string_view bytes);
  std::vector<DecodeResult> finish();

  std::size_t pending_bytes() const { return partial_.size(); }

 private:
  std::string partial_;
};

/// Returns the next chunk, std::nullopt at end of input. Throws on read failure.
using ByteSource = std::function<std::optional<std::string>()>;

std::vector<StreamItem> read_stream(const ByteSource& source);
std::vector<StreamItem> read_stream_text(std::string_view text);

}  // namespace benchforge
