#pragma once

// Small helpers shared by the test files: a seeded generator and a loop for
// randomized property checks that reports the first failing case.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace testing_support {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen_);
  }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(gen_); }
  // Log-uniform magnitude with random sign, for wide dynamic range.
  double wide(double lo_exp, double hi_exp) {
    const double m = std::pow(10.0, uniform(lo_exp, hi_exp));
    return integer(0, 1) ? m : -m;
  }
  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

inline std::vector<double> random_walk(Rng& rng, int n, double scale = 1.0) {
  std::vector<double> x(static_cast<std::size_t>(n));
  double v = 0.0;
  for (auto& e : x) {
    v += scale * rng.normal();
    e = v;
  }
  return x;
}

inline double rel_diff(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

}  // namespace testing_support
