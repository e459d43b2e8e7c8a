#include <gtest/gtest.h>

#include <sstream>

#include "support.hpp"
#include "turbine_lq/aero.hpp"

using namespace turbine_lq;
using testing_support::Rng;

TEST(Aero, WindPowerAndTipSpeedRatio) {
  const RotorGeometry g;
  // 0.5 rho pi r^2 v^3 written out by hand.
  EXPECT_NEAR(wind_power(g, 10.0), 0.5 * 1.225 * 3.14159265358979 * 4225.0 * 1000.0, 1e-3);
  EXPECT_NEAR(wind_power(g, 10.0), 8.1298e6, 1e2);
  EXPECT_NEAR(tip_speed_ratio(g, 119.31, 97.0, 8.0), 65.0 * 119.31 / 776.0, 1e-12);
  EXPECT_NEAR(tip_speed_ratio(g, 119.31, 97.0, 8.0), 9.994, 1e-3);
  EXPECT_THROW((void)wind_power(g, 0.0), std::domain_error);
  EXPECT_THROW((void)tip_speed_ratio(g, 100.0, 97.0, -1.0), std::domain_error);
}

TEST(Aero, PolynomialConstantTermAndClip) {
  const CpPolynomial cp = reference_cp();
  EXPECT_DOUBLE_EQ(cp.raw(0.0, 0.0), 0.098);
  // Independent evaluation of a few terms at (1, 0): c0 + c1 + c3 + c6 + c10.
  EXPECT_NEAR(cp.raw(1.0, 0.0), 0.098 - 0.150 + 0.061 - 0.00615 + 0.000184, 1e-15);
  Rng rng(21);
  for (int i = 0; i < 20000; ++i) {
    const double l = rng.uniform(0.0, 20.0);
    const double t = rng.uniform(-5.0, 30.0);
    const double v = cp(l, t);
    ASSERT_GE(v, 0.0);
    ASSERT_EQ(v, std::max(cp.raw(l, t), 0.0));
  }
}

TEST(Aero, BelowBetzOnDomainAndRejectsAbove) {
  const CpPolynomial cp = reference_cp();
  double peak = 0.0;
  const CpDomain d = cp.domain();
  for (int i = 0; i <= 300; ++i) {
    for (int j = 0; j <= 300; ++j) {
      const double l = d.lambda_min + (d.lambda_max - d.lambda_min) * i / 300.0;
      const double t = d.pitch_min + (d.pitch_max - d.pitch_min) * j / 300.0;
      peak = std::max(peak, cp(l, t));
    }
  }
  EXPECT_LT(peak, 16.0 / 27.0);
  EXPECT_GT(peak, 0.4);
  auto c = CpPolynomial::reference_coefficients();
  c[0] = 0.7;
  EXPECT_THROW(CpPolynomial(c, CpDomain{}), ConfigError);
}

TEST(Aero, DerivativesMatchFiniteDifferences) {
  const CpPolynomial cp = reference_cp();
  Rng rng(22);
  for (int i = 0; i < 5000; ++i) {
    const double l = rng.uniform(1.0, 13.0);
    const double t = rng.uniform(1.09, 22.0);
    const double h = 1e-5;
    const double fl = (cp.raw(l + h, t) - cp.raw(l - h, t)) / (2 * h);
    const double ft = (cp.raw(l, t + h) - cp.raw(l, t - h)) / (2 * h);
    ASSERT_NEAR(cp.d_lambda(l, t), fl, 1e-8);
    ASSERT_NEAR(cp.d_pitch(l, t), ft, 1e-8);
  }
}

TEST(Aero, OptimalTipSpeedRatioBeatsDenseScan) {
  const CpPolynomial cp = reference_cp();
  for (double t : {1.09, 3.0, 7.0, 12.0}) {
    const double ls = cp.optimal_tip_speed_ratio(t);
    double best = 0.0;
    for (int i = 0; i <= 120000; ++i) best = std::max(best, cp(1.0 + 12.0 * i / 120000.0, t));
    EXPECT_GE(cp(ls, t), best - 1e-12) << "pitch " << t;
    EXPECT_NEAR(cp.d_lambda(ls, t), 0.0, 1e-6) << "pitch " << t;
  }
  EXPECT_THROW((void)cp.optimal_tip_speed_ratio(0.5), std::domain_error);
}

// Exponential family at zero pitch: (A u + B) exp(-c u) with u = 1/li has
// its maximum at u = 1/c - B/A.
TEST(Aero, ExponentialFamilyMatchesClosedFormMaximum) {
  ExponentialCp e;
  e.a1 = 0.5176 * 116.0;
  e.a2 = -0.5176 * 0.4;
  e.a3 = -0.5176 * 5.0;
  e.a4 = -21.0;
  e.a5 = 0.0;
  e.a6 = 0.035;
  const double u = 1.0 / 21.0 - e.a3 / e.a1;
  EXPECT_NEAR(u, 0.090722, 1e-6);
  const double cp_star = e.a1 / 21.0 * std::exp(-21.0 * u);
  const double l_star = 1.0 / (u + 0.035);
  EXPECT_NEAR(cp_star, 0.4254, 2e-4);
  EXPECT_NEAR(l_star, 7.954, 1e-3);
  double best = 0.0;
  double arg = 0.0;
  for (int i = 0; i <= 200000; ++i) {
    const double l = 2.0 + 12.0 * i / 200000.0;
    const double v = e(l, 0.0);
    if (v > best) {
      best = v;
      arg = l;
    }
  }
  EXPECT_NEAR(best, cp_star, 1e-9);
  EXPECT_NEAR(arg, l_star, 1e-3);
  EXPECT_THROW((void)e(-0.0, 0.0), std::domain_error);
}

TEST(Aero, FitRecoversCoefficientsFromExactSamples) {
  const CpPolynomial ref = reference_cp();
  std::vector<CpSample> samples;
  for (int i = 0; i <= 12; ++i) {
    for (int j = 0; j <= 10; ++j) {
      const double l = 1.0 + i;
      const double t = 1.09 + 2.0 * j;
      samples.push_back({l, t, ref.raw(l, t)});
    }
  }
  const CpPolynomial fit = fit_cp_polynomial(samples, CpDomain{});
  for (int i = 0; i < CpPolynomial::kTerms; ++i) {
    EXPECT_NEAR(fit.coefficients()[i], ref.coefficients()[i],
                1e-9 * std::max(1.0, std::abs(ref.coefficients()[i])))
        << "term " << i;
  }
  std::vector<CpSample> few(samples.begin(), samples.begin() + 10);
  EXPECT_THROW((void)fit_cp_polynomial(few, CpDomain{}), ConfigError);
}

TEST(Aero, ReadsCpSamples) {
  std::istringstream in("lambda,pitch_deg,cp\n7,2,0.4\n\n8.5,3.25,0.41\n");
  const auto s = read_cp_samples(in);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[1].lambda, 8.5);
  EXPECT_EQ(s[1].pitch_deg, 3.25);
  std::istringstream bad("l,p,c\n1,2,3\n");
  EXPECT_THROW((void)read_cp_samples(bad), ConfigError);
  std::istringstream malformed("lambda,pitch_deg,cp\n1;2;3\n");
  EXPECT_THROW((void)read_cp_samples(malformed), ConfigError);
}

TEST(Aero, ArgmaxSpeedScalesWithWindAndMatchesFineScan) {
  const CpPolynomial cp = reference_cp();
  const RotorGeometry g;
  for (double v : {3.0, 6.3, 8.0, 11.7}) {
    for (double t : {1.09, 4.0, 9.5}) {
      EXPECT_EQ(cp_argmax_speed(cp, g, 97.0, 2.0 * v, t), 2.0 * cp_argmax_speed(cp, g, 97.0, v, t));
    }
  }
  // Exhaustive scan at 1e-3 resolution.
  double best = 0.0;
  double arg = 0.0;
  for (int i = 0; i <= 12000; ++i) {
    const double l = 1.0 + 1e-3 * i;
    if (cp(l, 1.09) > best) {
      best = cp(l, 1.09);
      arg = l;
    }
  }
  const double ls = 65.0 * cp_argmax_speed(cp, g, 97.0, 8.0, 1.09) / (97.0 * 8.0);
  EXPECT_NEAR(ls, arg, 1e-3);
  EXPECT_TRUE(ls >= 1.0 && ls <= 13.0);
  EXPECT_THROW((void)cp_argmax_speed(cp, g, 97.0, 8.0, 30.0), std::domain_error);
}

TEST(Aero, RotorPowerNeverExceedsBetz) {
  const CpPolynomial cp = reference_cp();
  const RotorGeometry g;
  testing_support::Rng rng(23);
  for (int i = 0; i < 20000; ++i) {
    const double v = rng.uniform(3.0, 25.0);
    const double l = rng.uniform(1.0, 13.0);
    const double t = rng.uniform(1.09, 22.0);
    const double w = l * v / 65.0;
    ASSERT_LE(rotor_torque(g, cp, w, v, t) * w, wind_power(g, v) * 16.0 / 27.0) << "case " << i;
  }
}
