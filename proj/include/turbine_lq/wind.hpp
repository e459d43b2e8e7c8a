#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "turbine_lq/common.hpp"
#include "turbine_lq/csv.hpp"

namespace turbine_lq {

struct WindSpec {
  double mean = 15.0;               // m/s
  double turbulence_intensity = 0.09;
  double duration = 600.0;          // s
  double ts = 0.004;                // s
  std::uint64_t seed = 1;
  double time_constant = 10.0;      // s
  // Rescale the record to exactly the requested mean and standard deviation
  // before guard-band clipping.
  bool normalize = true;

  void validate() const {
    if (!(mean > 0.0)) throw ConfigError("mean wind speed must be positive");
    if (!(turbulence_intensity >= 0.0 && turbulence_intensity <= 0.5)) {
      throw ConfigError("turbulence intensity must lie in [0, 0.5]");
    }
    if (!(duration > 0.0)) throw ConfigError("wind duration must be positive");
    if (!(ts > 0.0)) throw ConfigError("wind sampling time must be positive");
    if (!(time_constant > 0.0)) {
      throw ConfigError("turbulence time constant must be positive");
    }
  }
  [[nodiscard]] std::size_t samples() const {
    return static_cast<std::size_t>(std::llround(duration / ts)) + 1;
  }
};

struct WindSeries {
  double ts = 0.004;
  std::vector<double> values;  // m/s, values[k] at t = k ts
  std::size_t clipped = 0;     // samples moved onto the guard band

  [[nodiscard]] double duration() const {
    return values.empty() ? 0.0 : ts * static_cast<double>(values.size() - 1);
  }
};

// First-order colored noise (Ornstein-Uhlenbeck) with exact discretization,
// started from its stationary distribution and clipped to
// [0.5, 1.5] * mean.
[[nodiscard]] inline WindSeries generate_wind(const WindSpec& spec) {
  spec.validate();
  WindSeries out;
  out.ts = spec.ts;
  const std::size_t n = spec.samples();
  out.values.assign(n, spec.mean);
  const double sigma = spec.turbulence_intensity * spec.mean;
  if (sigma == 0.0) return out;

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double a = std::exp(-spec.ts / spec.time_constant);
  const double drive = std::sqrt(1.0 - a * a);
  std::vector<double> x(n);
  x[0] = normal(rng);
  for (std::size_t k = 1; k < n; ++k) x[k] = a * x[k - 1] + drive * normal(rng);

  double shift = 0.0;
  double scale = sigma;
  if (spec.normalize && n > 1) {
    const double m = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    const double sd = std::sqrt(ss / static_cast<double>(n));
    shift = -m;
    scale = sd > 0.0 ? sigma / sd : 0.0;
  }
  const Interval guard(0.5 * spec.mean, 1.5 * spec.mean);
  for (std::size_t k = 0; k < n; ++k) {
    const double v = spec.mean + scale * (x[k] + shift);
    const double c = sat(v, guard);
    if (c != v) ++out.clipped;
    out.values[k] = c;
  }
  return out;
}

// Deterministic linear ramps through (time, speed) breakpoints, held flat
// outside them.
[[nodiscard]] inline WindSeries scripted_wind(
    const std::vector<std::pair<double, double>>& points, double duration,
    double ts) {
  if (points.empty()) throw ConfigError("scripted wind needs breakpoints");
  std::vector<double> t;
  std::vector<double> v;
  for (const auto& [ti, vi] : points) {
    if (!(vi > 0.0)) throw ConfigError("scripted wind speeds must be positive");
    t.push_back(ti);
    v.push_back(vi);
  }
  const Table1D table(t, v);
  WindSeries out;
  out.ts = ts;
  const auto n = static_cast<std::size_t>(std::llround(duration / ts)) + 1;
  out.values.resize(n);
  for (std::size_t k = 0; k < n; ++k) out.values[k] = table(ts * static_cast<double>(k));
  return out;
}

inline constexpr const char* kWindHeader = "time_s,wind_mps";

inline void write_wind_csv(std::ostream& out, const WindSeries& w) {
  std::string text = kWindHeader;
  text += '\n';
  for (std::size_t k = 0; k < w.values.size(); ++k) {
    csv::append(text, w.ts * static_cast<double>(k));
    text += ',';
    csv::append(text, w.values[k]);
    text += '\n';
  }
  out << text;
}

// Reads a uniformly sampled series; the sampling time is taken from the
// first two rows and every row must sit on that grid.
[[nodiscard]] inline WindSeries read_wind_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind(kWindHeader, 0) != 0) {
    throw ConfigError(std::string("wind file must start with '") + kWindHeader + "'");
  }
  std::vector<double> t;
  WindSeries out;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto cells = csv::split(line);
    if (cells.size() != 2) {
      throw ConfigError("wind file row " + std::to_string(row) +
                        " does not have 2 fields");
    }
    t.push_back(csv::parse_double(cells[0]));
    const double v = csv::parse_double(cells[1]);
    if (!(v > 0.0)) {
      throw ConfigError("wind file row " + std::to_string(row) +
                        " has a nonpositive speed");
    }
    out.values.push_back(v);
  }
  if (t.size() < 2) throw ConfigError("wind file needs at least two rows");
  out.ts = t[1] - t[0];
  if (!(out.ts > 0.0)) throw ConfigError("wind file times must increase");
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double expected = t[0] + out.ts * static_cast<double>(k);
    if (std::abs(t[k] - expected) > 1e-9 * std::max(1.0, std::abs(expected))) {
      throw ConfigError("wind file is not uniformly sampled");
    }
  }
  return out;
}

enum class DemandShape {
  kStairs,  // value i holds on [times[i], times[i+1])
  kRamps,   // linear between breakpoints, flat after the last
};

class DemandSchedule {
 public:
  DemandSchedule(std::vector<double> times, std::vector<double> values,
                 double duration, double rated_power,
                 DemandShape shape = DemandShape::kStairs)
      : times_(std::move(times)),
        values_(std::move(values)),
        duration_(duration),
        shape_(shape) {
    if (times_.empty() || times_.size() != values_.size()) {
      throw ConfigError("demand schedule needs one value per breakpoint");
    }
    if (times_.front() != 0.0) {
      throw ConfigError("demand schedule must start at t = 0");
    }
    for (std::size_t i = 1; i < times_.size(); ++i) {
      if (!(times_[i] > times_[i - 1])) {
        throw ConfigError("demand breakpoints must be strictly increasing");
      }
    }
    for (double v : values_) {
      if (!(v >= 0.0 && v <= rated_power)) {
        throw ConfigError("demand " + std::to_string(v) +
                          " W lies outside [0, rated power]");
      }
    }
    if (!(duration > 0.0)) throw ConfigError("demand duration must be positive");
  }

  static DemandSchedule constant(double value, double duration, double rated) {
    return DemandSchedule({0.0}, {value}, duration, rated);
  }

  [[nodiscard]] double operator()(double t) const {
    if (!(t >= 0.0 && t <= duration_)) {
      throw std::out_of_range("demand queried at t = " + std::to_string(t) +
                              " s outside [0, duration]");
    }
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    const auto i = static_cast<std::size_t>(it - times_.begin()) - 1;
    if (shape_ == DemandShape::kStairs || i + 1 == times_.size()) {
      return values_[i];
    }
    const double w = (t - times_[i]) / (times_[i + 1] - times_[i]);
    return std::lerp(values_[i], values_[i + 1], w);
  }

  [[nodiscard]] const std::vector<double>& times() const { return times_; }
  [[nodiscard]] const std::vector<double>& values() const { return values_; }
  [[nodiscard]] double duration() const { return duration_; }
  [[nodiscard]] DemandShape shape() const { return shape_; }

 private:
  std::vector<double> times_;
  std::vector<double> values_;
  double duration_;
  DemandShape shape_;
};

}  // namespace turbine_lq
