#include <gtest/gtest.h>

#include <numeric>
#include <sstream>

#include "support.hpp"
#include "turbine_lq/wind.hpp"

using namespace turbine_lq;

namespace {

double mean(const std::vector<double>& x, std::size_t a = 0, std::size_t b = 0) {
  if (b == 0) b = x.size();
  return std::accumulate(x.begin() + a, x.begin() + b, 0.0) / static_cast<double>(b - a);
}

double stdev(const std::vector<double>& x, std::size_t a = 0, std::size_t b = 0) {
  if (b == 0) b = x.size();
  const double m = mean(x, a, b);
  double s = 0.0;
  for (std::size_t i = a; i < b; ++i) s += (x[i] - m) * (x[i] - m);
  return std::sqrt(s / static_cast<double>(b - a));
}

}  // namespace

TEST(Wind, ZeroIntensityIsConstant) {
  WindSpec s;
  s.turbulence_intensity = 0.0;
  s.duration = 10.0;
  const WindSeries w = generate_wind(s);
  ASSERT_EQ(w.values.size(), 2501u);
  for (double v : w.values) ASSERT_EQ(v, 15.0);
}

TEST(Wind, SameSeedSameRecord) {
  WindSpec s;
  s.duration = 60.0;
  s.seed = 7;
  EXPECT_EQ(generate_wind(s).values, generate_wind(s).values);
  WindSpec t = s;
  t.seed = 8;
  EXPECT_NE(generate_wind(s).values, generate_wind(t).values);
}

TEST(Wind, StatisticsOverSeeds) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    WindSpec s;
    s.seed = seed;
    const WindSeries w = generate_wind(s);
    const double m = mean(w.values);
    const double ti = stdev(w.values) / m;
    EXPECT_NEAR(m, 15.0, 0.02 * 15.0) << "seed " << seed;
    EXPECT_GE(ti, 0.0765) << "seed " << seed;
    EXPECT_LE(ti, 0.1035) << "seed " << seed;
  }
}

// Without rescaling the process must show the Ornstein-Uhlenbeck signature:
// lag correlation exp(-lag / tau) and the same spread in both halves.
TEST(Wind, RawProcessIsStationaryWithTheRightCorrelation) {
  WindSpec s;
  s.normalize = false;
  s.duration = 7200.0;
  s.seed = 3;
  const WindSeries w = generate_wind(s);
  const std::size_t n = w.values.size();
  const double m = mean(w.values);
  const double sd = stdev(w.values);
  EXPECT_NEAR(sd / 15.0, 0.09, 0.015);
  EXPECT_NEAR(m, 15.0, 0.1 * 1.35);
  EXPECT_NEAR(stdev(w.values, 0, n / 2) / stdev(w.values, n / 2, n), 1.0, 0.2);
  const std::size_t lag = 2500;  // 10 s
  double c = 0.0;
  for (std::size_t i = 0; i + lag < n; ++i) c += (w.values[i] - m) * (w.values[i + lag] - m);
  c /= static_cast<double>(n - lag) * sd * sd;
  EXPECT_NEAR(c, std::exp(-1.0), 0.1);
}

TEST(Wind, ValidationRejectsBadSpecs) {
  WindSpec s;
  s.turbulence_intensity = 0.6;
  EXPECT_THROW((void)generate_wind(s), ConfigError);
  s = WindSpec{};
  s.mean = 0.0;
  EXPECT_THROW((void)generate_wind(s), ConfigError);
}

TEST(Wind, CsvRoundTripIsBitExact) {
  WindSpec s;
  s.duration = 20.0;
  const WindSeries w = generate_wind(s);
  std::ostringstream out;
  write_wind_csv(out, w);
  EXPECT_EQ(out.str().rfind("time_s,wind_mps\n", 0), 0u);
  std::istringstream in(out.str());
  const WindSeries back = read_wind_csv(in);
  EXPECT_EQ(back.values, w.values);
  EXPECT_NEAR(back.ts, w.ts, 1e-15);
  std::ostringstream again;
  write_wind_csv(again, back);
  std::istringstream in2(again.str());
  EXPECT_EQ(read_wind_csv(in2).values, w.values);
  std::istringstream gap("time_s,wind_mps\n0,10\n0.004,10\n0.012,10\n");
  EXPECT_THROW((void)read_wind_csv(gap), ConfigError);
  std::istringstream neg("time_s,wind_mps\n0,10\n0.004,-1\n");
  EXPECT_THROW((void)read_wind_csv(neg), ConfigError);
}

TEST(Wind, ScriptedRampsInterpolate) {
  const WindSeries w = scripted_wind({{0, 9.0}, {60, 9.0}, {120, 13.0}}, 200.0, 0.004);
  EXPECT_EQ(w.values.front(), 9.0);
  EXPECT_NEAR(w.values[22500], 11.0, 1e-12);  // t = 90 s
  EXPECT_EQ(w.values.back(), 13.0);
}

TEST(Demand, StairsAndRamps) {
  const DemandSchedule st({0, 100, 200}, {1e6, 2e6, 3e6}, 300, 3.35e6);
  EXPECT_EQ(st(0.0), 1e6);
  EXPECT_EQ(st(99.999), 1e6);
  EXPECT_EQ(st(100.0), 2e6);
  EXPECT_EQ(st(300.0), 3e6);
  const DemandSchedule rp({0, 100, 200}, {1e6, 2e6, 3e6}, 300, 3.35e6, DemandShape::kRamps);
  EXPECT_DOUBLE_EQ(rp(50.0), 1.5e6);
  EXPECT_EQ(rp(250.0), 3e6);
  EXPECT_THROW((void)st(-0.1), std::out_of_range);
  EXPECT_THROW((void)st(300.1), std::out_of_range);
  EXPECT_THROW(DemandSchedule({0, 100}, {1e6, 4e6}, 300, 3.35e6), ConfigError);
  EXPECT_THROW(DemandSchedule({5}, {1e6}, 300, 3.35e6), ConfigError);
  EXPECT_THROW(DemandSchedule({0, 0}, {1e6, 1e6}, 300, 3.35e6), ConfigError);
  EXPECT_EQ(DemandSchedule::constant(2e6, 10, 3.35e6)(7.0), 2e6);
}
