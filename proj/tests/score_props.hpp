#pragma once

#include "benchforge/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace scoreprops {

/// Direct product formula at extended precision:
/// prod (1 + p*s)^(w / sum w).
inline long double naive_score(const std::vector<benchforge::BenchResult>& rs) {
  long double total = 0;
  for (const auto& r : rs) {
    if (r.weight > 0) total += r.weight;
  }
  long double product = 1;
  for (const auto& r : rs) {
    if (r.weight <= 0) continue;
    const long double x = static_cast<long double>(r.perf) * static_cast<long double>(r.success_rate);
    product *= std::pow(1.0L + x, static_cast<long double>(r.weight) / total);
  }
  return product;
}

inline std::vector<benchforge::BenchResult> random_suite(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0, 1);
  const int n = 1 + static_cast<int>(rng() % 30);
  std::vector<benchforge::BenchResult> rs;
  for (int i = 0; i < n; ++i) {
    benchforge::BenchResult r;
    r.bench = "b" + std::to_string(i);
    r.weight = rng() % 5 == 0 ? 0.0 : 0.1 + 9.9 * u(rng);
    switch (rng() % 4) {
      case 0:
        r.perf = 0;
        break;
      case 1:
        r.perf = 1e8 * u(rng);
        break;
      default:
        r.perf = std::pow(10.0, -3 + 11 * u(rng));
        break;
    }
    r.perf = std::min(r.perf, 1e8);
    r.success_rate = rng() % 3 == 0 ? u(rng) : 1.0;
    rs.push_back(r);
  }
  if (std::none_of(rs.begin(), rs.end(), [](const auto& r) { return r.weight > 0; })) rs[0].weight = 1.0;
  return rs;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

/// Runs every score property on `cases` random suites. Returns one message
/// per violated property instance.
inline std::vector<std::string> check(int cases, std::uint64_t seed) {
  using benchforge::suite_score;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<std::string> failures;
  auto fail = [&](int i, const std::string& what) { failures.push_back("case " + std::to_string(i) + ": " + what); };

  for (int i = 0; i < cases; ++i) {
    auto rs = random_suite(rng);
    const double base = suite_score(rs).score;

    auto scaled = rs;
    const double c = std::pow(10.0, -3 + 6 * u(rng));
    for (auto& r : scaled) r.weight *= c;
    if (rel(suite_score(scaled).score, base) > 1e-12) fail(i, "weight scaling");

    auto shuffled = rs;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    if (rel(suite_score(shuffled).score, base) > 1e-12) fail(i, "permutation");

    const std::size_t k = rng() % rs.size();
    if (rs[k].weight > 0 && rs[k].success_rate > 0) {
      auto better = rs;
      better[k].perf = better[k].perf * 2 + 1;
      if (!(suite_score(better).score > base)) fail(i, "monotonicity");
    }

    auto zero_s = rs;
    auto zero_p = rs;
    zero_s[k].success_rate = 0;
    zero_p[k].perf = 0;
    if (suite_score(zero_s).score != suite_score(zero_p).score) fail(i, "failure floor");

    const long double naive = naive_score(rs);
    if (std::abs(static_cast<long double>(base) - naive) / naive > 1e-9L) fail(i, "log domain vs naive");

    auto uniform = rs;
    const double p = rng() % 2 ? std::floor(1e8 * u(rng)) : 1e8 * u(rng);
    for (auto& r : uniform) {
      r.perf = p;
      r.success_rate = 1.0;
    }
    if (suite_score(uniform).score != p + 1) fail(i, "uniform suite");
  }
  return failures;
}

}  // namespace scoreprops
