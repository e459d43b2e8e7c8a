#include <gtest/gtest.h>

#include <limits>

#include "support.hpp"
#include "turbine_lq/common.hpp"

using namespace turbine_lq;
using testing_support::Rng;

namespace {

constexpr int kCases = 100000;

Interval random_interval(Rng& rng, double scale) {
  const double a = rng.uniform(-scale, scale);
  return Interval(a, a + rng.uniform(1e-6, 2.0 * scale));
}

}  // namespace

TEST(Interval, RejectsEmptyOrInverted) {
  EXPECT_THROW(Interval(1.0, 1.0), ConfigError);
  EXPECT_THROW(Interval(2.0, 1.0), ConfigError);
  EXPECT_THROW(Interval(0.0, std::nan("")), ConfigError);
}

TEST(Sat, Examples) {
  const Interval b(1.09, 22.0);
  EXPECT_EQ(sat(0.0, b), 1.09);
  EXPECT_EQ(sat(30.0, b), 22.0);
  EXPECT_EQ(sat(5.5, b), 5.5);
}

TEST(SatProperty, IdempotentAndInside) {
  Rng rng(11);
  for (int i = 0; i < kCases; ++i) {
    const Interval b = random_interval(rng, 1e3);
    const double x = rng.wide(-3, 5);
    const double y = sat(x, b);
    ASSERT_TRUE(b.contains(y)) << "case " << i;
    ASSERT_EQ(sat(y, b), y) << "case " << i;
    if (b.contains(x)) {
      ASSERT_EQ(y, x) << "case " << i;
    }
  }
}

TEST(RateLimiter, Examples) {
  const Interval value(0.0, 33170.0);
  const Interval step = Interval::symmetric(6000.0);
  EXPECT_EQ(rate_limited_update(10000.0, 30000.0, value, step), 16000.0);
  EXPECT_EQ(rate_limited_update(10000.0, 12000.0, value, step), 12000.0);
  EXPECT_EQ(rate_limited_update(30000.0, 50000.0, value, step), 33170.0);
  EXPECT_EQ(rate_limited_update(1000.0, -50000.0, value, step), 0.0);
}

TEST(RateLimiterProperty, RespectsValueAndSlewBounds) {
  Rng rng(12);
  for (int i = 0; i < kCases; ++i) {
    const Interval value = random_interval(rng, 100.0);
    const Interval step(-rng.uniform(1e-4, 5.0), rng.uniform(1e-4, 5.0));
    const double prev = sat(rng.uniform(-150.0, 150.0), value);
    const double desired = rng.wide(-3, 3);
    const double u = rate_limited_update(prev, desired, value, step);
    ASSERT_TRUE(value.contains(u)) << "case " << i;
    ASSERT_TRUE(step.contains(u - prev)) << "case " << i << " delta " << u - prev;
    // Reaching the saturated target whenever the slew allows it.
    const double target = sat(desired, value);
    if (step.contains(target - prev)) {
      ASSERT_EQ(u, target) << "case " << i;
    }
  }
}

TEST(RateLimiterProperty, SequencesStayWithinSlew) {
  Rng rng(13);
  const Interval value(1.09, 22.0);
  const Interval step = Interval::symmetric(0.000488 * kDegPerRad);
  double prev = 1.09;
  for (int i = 0; i < kCases; ++i) {
    const double u = rate_limited_update(prev, rng.uniform(-5.0, 30.0), value, step);
    ASSERT_TRUE(step.contains(u - prev)) << "step " << i;
    ASSERT_TRUE(value.contains(u)) << "step " << i;
    prev = u;
  }
}

TEST(Alpha, Conventions) {
  EXPECT_NEAR(make_alpha(0.004, 20.0, AlphaConvention::kPlus), 0.004 / 20.004, 1e-18);
  EXPECT_NEAR(make_alpha(0.004, 20.0, AlphaConvention::kPlus), 1.9996e-4, 1e-8);
  EXPECT_DOUBLE_EQ(make_alpha(0.004, 1.0, AlphaConvention::kMinus), 0.004 / 0.996);
  EXPECT_THROW((void)make_alpha(0.004, 0.008, AlphaConvention::kMinus), ConfigError);
  EXPECT_THROW((void)make_alpha(0.0, 1.0, AlphaConvention::kPlus), ConfigError);
  EXPECT_EQ(make_alpha(0.004, 0.0, AlphaConvention::kPlus), 1.0);
}

TEST(Lowpass, FirstStepPassesThroughAndAlphaOneIsIdentity) {
  LowpassFilter f(0.3);
  EXPECT_EQ(f.step(5.0), 5.0);
  EXPECT_DOUBLE_EQ(f.step(6.0), 5.3);
  LowpassFilter id(1.0);
  for (double x : {1.0, -2.0, 7.5}) EXPECT_EQ(id.step(x), x);
  EXPECT_THROW(LowpassFilter(1.5), ConfigError);
}

TEST(LowpassProperty, ConvergesGeometricallyToConstantInput) {
  Rng rng(14);
  for (int i = 0; i < kCases; ++i) {
    const double alpha = rng.uniform(1e-3, 1.0);
    const double start = rng.uniform(-1e3, 1e3);
    const double u = rng.uniform(-1e3, 1e3);
    LowpassFilter f(alpha);
    f.reset(start);
    const int n = rng.integer(1, 30);
    double y = start;
    for (int k = 0; k < n; ++k) y = f.step(u);
    // Closed form of the recursion.
    const double expected = u + (start - u) * std::pow(1.0 - alpha, n);
    ASSERT_NEAR(y, expected, 1e-9 * (1.0 + std::abs(start) + std::abs(u))) << "case " << i;
    // Never overshoots the input.
    ASSERT_LE(std::abs(y - u), std::abs(start - u) * (1.0 + 1e-12) + 1e-12) << "case " << i;
  }
}

TEST(Table1D, ExactAtNodesAndClampedOutside) {
  const Table1D t({0.0, 1.0, 3.0}, {2.0, 4.0, -1.0});
  EXPECT_EQ(t(0.0), 2.0);
  EXPECT_EQ(t(1.0), 4.0);
  EXPECT_EQ(t(3.0), -1.0);
  EXPECT_EQ(t(-5.0), 2.0);
  EXPECT_EQ(t(9.0), -1.0);
  EXPECT_DOUBLE_EQ(t(2.0), 1.5);
  EXPECT_THROW(Table1D({0.0, 0.0}, {1.0, 2.0}), ConfigError);
  EXPECT_THROW(Table1D({0.0, 1.0}, {1.0}), ConfigError);
}

TEST(TableProperty, NodeExactAndBounded) {
  Rng rng(15);
  for (int i = 0; i < kCases / 10; ++i) {
    const int nx = rng.integer(1, 8);
    const int ny = rng.integer(1, 8);
    std::vector<double> x(nx), y(ny), v(nx * ny), v1(nx);
    double acc = rng.uniform(-10.0, 10.0);
    for (auto& e : x) e = (acc += rng.uniform(1e-3, 5.0));
    acc = rng.uniform(-10.0, 10.0);
    for (auto& e : y) e = (acc += rng.uniform(1e-3, 5.0));
    for (auto& e : v) e = rng.uniform(-1e4, 1e4);
    for (auto& e : v1) e = rng.uniform(-1e4, 1e4);
    const Table2D t2(x, y, v);
    const Table1D t1(x, v1);
    const double lo = *std::min_element(v.begin(), v.end());
    const double hi = *std::max_element(v.begin(), v.end());
    const double lo1 = *std::min_element(v1.begin(), v1.end());
    const double hi1 = *std::max_element(v1.begin(), v1.end());
    for (int a = 0; a < nx; ++a) {
      ASSERT_EQ(t1(x[a]), v1[a]) << "case " << i;
      for (int b = 0; b < ny; ++b) ASSERT_EQ(t2(x[a], y[b]), v[a * ny + b]) << "case " << i;
    }
    for (int k = 0; k < 10; ++k) {
      const double qx = rng.uniform(x.front() - 3.0, x.back() + 3.0);
      const double qy = rng.uniform(y.front() - 3.0, y.back() + 3.0);
      const double r2 = t2(qx, qy);
      const double r1 = t1(qx);
      ASSERT_TRUE(r2 >= lo && r2 <= hi) << "case " << i;
      ASSERT_TRUE(r1 >= lo1 && r1 <= hi1) << "case " << i;
    }
  }
}
