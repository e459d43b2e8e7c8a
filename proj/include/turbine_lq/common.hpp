#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace turbine_lq {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kDegPerRad = 180.0 / kPi;
inline constexpr double kBetzLimit = 16.0 / 27.0;

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Closed interval [lower, upper]. Either end may be infinite.
class Interval {
 public:
  Interval(double lower, double upper) : lower_(lower), upper_(upper) {
    if (!(lower < upper)) {
      throw ConfigError("interval requires lower < upper, got [" +
                        std::to_string(lower) + ", " + std::to_string(upper) +
                        "]");
    }
  }

  static Interval symmetric(double half_width) {
    return Interval(-half_width, half_width);
  }
  static Interval nonnegative() {
    return Interval(0.0, std::numeric_limits<double>::infinity());
  }

  [[nodiscard]] double lower() const { return lower_; }
  [[nodiscard]] double upper() const { return upper_; }
  [[nodiscard]] bool contains(double x) const {
    return x >= lower_ && x <= upper_;
  }

 private:
  double lower_;
  double upper_;
};

[[nodiscard]] inline double sat(double x, const Interval& bounds) {
  return std::clamp(x, bounds.lower(), bounds.upper());
}

// One step of an actuator with magnitude and slew limits:
// prev + sat(sat(desired, value) - prev, step). When the slew limit is
// active the result is nudged by at most a few ulps so that the computed
// difference result - prev never leaves the step interval.
[[nodiscard]] inline double rate_limited_update(double prev, double desired,
                                                const Interval& value,
                                                const Interval& step) {
  const double target = sat(desired, value);
  const double delta = target - prev;
  if (step.contains(delta)) return target;
  const double inf = std::numeric_limits<double>::infinity();
  double r = prev + (delta > step.upper() ? step.upper() : step.lower());
  while (r - prev > step.upper()) r = std::nextafter(r, -inf);
  while (r - prev < step.lower()) r = std::nextafter(r, inf);
  return sat(r, value);
}

enum class AlphaConvention {
  kMinus,  // Ts / (T - Ts), requires T > 2 Ts
  kPlus,   // Ts / (T + Ts)
};

[[nodiscard]] inline double make_alpha(double ts, double time_constant,
                                       AlphaConvention convention) {
  if (!(ts > 0.0)) throw ConfigError("sampling time must be positive");
  if (convention == AlphaConvention::kMinus) {
    if (!(time_constant > 2.0 * ts)) {
      throw ConfigError("filter time constant " +
                        std::to_string(time_constant) +
                        " s must exceed twice the sampling time");
    }
    return ts / (time_constant - ts);
  }
  if (!(time_constant >= 0.0)) {
    throw ConfigError("filter time constant must be nonnegative");
  }
  return ts / (time_constant + ts);
}

// First-order recursion y(k) = (1 - a) y(k-1) + a u(k). The first update
// passes its input through.
class LowpassFilter {
 public:
  LowpassFilter() = default;
  explicit LowpassFilter(double alpha) : alpha_(alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
      throw ConfigError("lowpass alpha must lie in [0, 1]");
    }
  }

  double step(double input) {
    if (!initialized_) {
      reset(input);
      return last_;
    }
    last_ = (1.0 - alpha_) * last_ + alpha_ * input;
    return last_;
  }

  void reset(double value) {
    last_ = value;
    initialized_ = true;
  }

  [[nodiscard]] double alpha() const { return alpha_; }
  [[nodiscard]] double value() const { return last_; }
  [[nodiscard]] bool initialized() const { return initialized_; }

 private:
  double alpha_ = 1.0;
  double last_ = 0.0;
  bool initialized_ = false;
};

namespace detail {

inline void check_axis(const std::vector<double>& axis, const char* name) {
  if (axis.empty()) {
    throw ConfigError(std::string("lookup table axis '") + name +
                      "' is empty");
  }
  for (std::size_t i = 1; i < axis.size(); ++i) {
    if (!(axis[i] > axis[i - 1])) {
      throw ConfigError(std::string("lookup table axis '") + name +
                        "' must be strictly increasing");
    }
  }
}

// Index i and weight w such that x ~ (1-w) axis[i] + w axis[i+1], clamped.
inline std::pair<std::size_t, double> bracket(const std::vector<double>& axis,
                                              double x) {
  if (axis.size() == 1 || x <= axis.front()) return {0, 0.0};
  if (x >= axis.back()) return {axis.size() - 2, 1.0};
  auto it = std::upper_bound(axis.begin(), axis.end(), x);
  auto i = static_cast<std::size_t>(it - axis.begin()) - 1;
  double w = (x - axis[i]) / (axis[i + 1] - axis[i]);
  return {i, w};
}

}  // namespace detail

// Piecewise-linear table, clamped to the edge values outside the grid.
class Table1D {
 public:
  Table1D(std::vector<double> x, std::vector<double> y)
      : x_(std::move(x)), y_(std::move(y)) {
    detail::check_axis(x_, "x");
    if (y_.size() != x_.size()) {
      throw ConfigError("lookup table values do not match the grid");
    }
  }

  [[nodiscard]] double operator()(double x) const {
    if (x_.size() == 1) return y_.front();
    auto [i, w] = detail::bracket(x_, x);
    return std::lerp(y_[i], y_[i + 1], w);
  }

  [[nodiscard]] const std::vector<double>& x() const { return x_; }
  [[nodiscard]] const std::vector<double>& y() const { return y_; }

 private:
  std::vector<double> x_;
  std::vector<double> y_;
};

// Bilinear table over a rectangular grid. Values are row-major with x as
// the slow index: values[i * ny + j] = f(x[i], y[j]).
class Table2D {
 public:
  Table2D(std::vector<double> x, std::vector<double> y,
          std::vector<double> values)
      : x_(std::move(x)), y_(std::move(y)), v_(std::move(values)) {
    detail::check_axis(x_, "x");
    detail::check_axis(y_, "y");
    if (v_.size() != x_.size() * y_.size()) {
      throw ConfigError("lookup table values do not match the grid");
    }
  }

  [[nodiscard]] double at(std::size_t i, std::size_t j) const {
    return v_[i * y_.size() + j];
  }

  [[nodiscard]] double operator()(double x, double y) const {
    auto [i, wx] = detail::bracket(x_, x);
    auto [j, wy] = detail::bracket(y_, y);
    auto along_y = [&](std::size_t row) {
      if (y_.size() == 1) return at(row, 0);
      return std::lerp(at(row, j), at(row, j + 1), wy);
    };
    if (x_.size() == 1) return along_y(0);
    return std::lerp(along_y(i), along_y(i + 1), wx);
  }

  [[nodiscard]] const std::vector<double>& x() const { return x_; }
  [[nodiscard]] const std::vector<double>& y() const { return y_; }
  [[nodiscard]] const std::vector<double>& values() const { return v_; }

 private:
  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> v_;
};

}  // namespace turbine_lq
