#pragma once

#include "benchforge/protocol.hpp"

#include <cmath>
#include <cstring>
#include <random>
#include <string>
#include <vector>

namespace gen {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Finite double with a wide exponent range, including awkward values.
inline double any_finite(std::mt19937_64& rng) {
  switch (rng() % 6) {
    case 0:
      return 0.0;
    case 1:
      return static_cast<double>(static_cast<std::int64_t>(rng() % 2000001) - 1000000);
    case 2: {
      double d;
      do {
        const std::uint64_t bits = rng();
        std::memcpy(&d, &bits, sizeof d);
      } while (!std::isfinite(d));
      return d;
    }
    default:
      return uniform(rng, -1.0, 1.0) * std::pow(10.0, uniform(rng, -30, 30));
  }
}

inline double positive(std::mt19937_64& rng) {
  return std::pow(10.0, uniform(rng, -9, 9)) * uniform(rng, 1.0, 10.0);
}

inline std::string text(std::mt19937_64& rng) {
  static const std::vector<std::string> atoms = {"train", "eval", "a", " ", "\"", "\\", "\n", "\t",
                                                 "é", "日本", "{", "}", ":", ",", "\x01", "0"};
  std::string s;
  for (int n = static_cast<int>(rng() % 6); n > 0; --n) s += atoms[rng() % atoms.size()];
  return s;
}

inline nlohmann::json value(std::mt19937_64& rng, int depth = 0) {
  switch (rng() % (depth > 2 ? 5 : 7)) {
    case 0:
      return nullptr;
    case 1:
      return rng() % 2 == 0;
    case 2:
      return static_cast<std::int64_t>(rng());
    case 3:
      return any_finite(rng);
    case 4:
      return text(rng);
    case 5: {
      auto a = nlohmann::json::array();
      for (int n = static_cast<int>(rng() % 4); n > 0; --n) a.push_back(value(rng, depth + 1));
      return a;
    }
    default: {
      auto o = nlohmann::json::object();
      for (int n = static_cast<int>(rng() % 4); n > 0; --n) o[text(rng)] = value(rng, depth + 1);
      return o;
    }
  }
}

/// A valid MetricEvent of any kind.
inline benchforge::MetricEvent event(std::mt19937_64& rng) {
  using benchforge::EventKind;
  benchforge::MetricEvent e;
  e.event = static_cast<EventKind>(rng() % 11);
  e.time = rng() % 4 == 0 ? any_finite(rng) : uniform(rng, 0, 2e9);
  e.task = text(rng);
  e.data = nlohmann::json::object();
  for (int n = static_cast<int>(rng() % 4); n > 0; --n) e.data["k" + text(rng)] = value(rng);
  if (e.event == EventKind::Rate) {
    const double work = rng() % 2 ? static_cast<double>(1 + rng() % 4096) : positive(rng);
    const double elapsed = positive(rng);
    e = benchforge::make_rate_event(e.time, e.task, work, elapsed, text(rng), e.data);
    if (rng() % 3 == 0) e.data.erase("elapsed");
  }
  return e;
}

/// Splits text at random byte offsets (possibly inside UTF-8 sequences).
inline std::vector<std::string> chunks(std::mt19937_64& rng, const std::string& text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t n = 1 + rng() % (rng() % 2 ? 7 : 300);
    out.push_back(text.substr(pos, n));
    pos += n;
  }
  return out;
}

}  // namespace gen
