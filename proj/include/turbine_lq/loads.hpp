#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "turbine_lq/common.hpp"
#include "turbine_lq/csv.hpp"

namespace turbine_lq {

struct Cycle {
  double range = 0.0;
  double mean = 0.0;
  double count = 1.0;  // 1 for closed cycles, 0.5 for residual half cycles
};

struct CycleSet {
  std::vector<Cycle> cycles;
  std::vector<double> residual;  // turning points left unclosed

  [[nodiscard]] double total_count() const {
    double n = 0.0;
    for (const auto& c : cycles) n += c.count;
    return n;
  }
};

struct DelConfig {
  double woehler_exponent = 4.0;
  double reference_cycles = 1.0;

  void validate() const {
    if (!(woehler_exponent >= 1.0)) {
      throw ConfigError("Woehler exponent must be at least 1");
    }
    if (!(reference_cycles > 0.0)) {
      throw ConfigError("reference cycle count must be positive");
    }
  }
};

// Local extrema including both endpoints, with plateaus collapsed.
[[nodiscard]] inline std::vector<double> turning_points(std::span<const double> series) {
  std::vector<double> out;
  if (series.empty()) return out;
  out.push_back(series.front());
  double direction = 0.0;
  for (std::size_t i = 1; i < series.size(); ++i) {
    const double x = series[i];
    const double step = x - out.back();
    if (step == 0.0) continue;
    const double dir = step > 0.0 ? 1.0 : -1.0;
    if (dir == direction) {
      out.back() = x;
    } else {
      out.push_back(x);
      direction = dir;
    }
  }
  return out;
}

// Four-point rainflow counting. A closed cycle is extracted whenever the
// inner range of the last four turning points is bounded by both outer
// ranges; whatever remains is reported as half cycles.
[[nodiscard]] inline CycleSet rainflow(std::span<const double> series) {
  CycleSet out;
  std::vector<double>& stack = out.residual;
  for (double x : turning_points(series)) {
    stack.push_back(x);
    while (stack.size() >= 4) {
      const std::size_t n = stack.size();
      const double s1 = stack[n - 4];
      const double s2 = stack[n - 3];
      const double s3 = stack[n - 2];
      const double s4 = stack[n - 1];
      const double inner = std::abs(s3 - s2);
      if (inner <= std::abs(s2 - s1) && inner <= std::abs(s4 - s3)) {
        out.cycles.push_back({inner, 0.5 * (s2 + s3), 1.0});
        stack.erase(stack.end() - 3, stack.end() - 1);
      } else {
        break;
      }
    }
  }
  for (std::size_t i = 1; i < stack.size(); ++i) {
    out.cycles.push_back(
        {std::abs(stack[i] - stack[i - 1]), 0.5 * (stack[i] + stack[i - 1]), 0.5});
  }
  return out;
}

// (sum count * range^m / N_ref)^(1/m)
[[nodiscard]] inline double damage_equivalent_load(const CycleSet& cycles,
                                                   const DelConfig& cfg) {
  cfg.validate();
  if (cycles.cycles.empty()) return 0.0;
  const double m = cfg.woehler_exponent;
  // Factor out the largest range so high exponents do not overflow.
  double peak = 0.0;
  for (const auto& c : cycles.cycles) peak = std::max(peak, c.range);
  if (peak == 0.0) return 0.0;
  double sum = 0.0;
  for (const auto& c : cycles.cycles) sum += c.count * std::pow(c.range / peak, m);
  return peak * std::pow(sum / cfg.reference_cycles, 1.0 / m);
}

inline constexpr const char* kCyclesHeader = "range,mean,count";

[[nodiscard]] inline std::string cycles_csv(const CycleSet& set) {
  std::string text = kCyclesHeader;
  text += '\n';
  for (const auto& c : set.cycles) {
    csv::append(text, c.range);
    text += ',';
    csv::append(text, c.mean);
    text += ',';
    csv::append(text, c.count);
    text += '\n';
  }
  return text;
}

}  // namespace turbine_lq
