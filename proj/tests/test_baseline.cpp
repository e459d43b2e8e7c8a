#include <gtest/gtest.h>

#include "support.hpp"
#include "turbine_lq/baseline.hpp"

using namespace turbine_lq;

namespace {

const TurbineParameters kP{};

}  // namespace

TEST(Baseline, DesiredSpeedIsTheCubeRootCapped) {
  const BaselineConfig c;
  EXPECT_NEAR(desired_speed(kP, c, 2e6), std::cbrt(2e6 / (0.936 * 1.75)), 1e-12);
  EXPECT_EQ(desired_speed(kP, c, 3.35e6), 119.31);
  EXPECT_EQ(desired_speed(kP, c, 0.0), 0.0);
}

TEST(Baseline, TorqueLawCases) {
  const BaselineConfig c;
  const double wd = 100.0;
  auto law = [&](double wf, double wc, double pw) { return torque_law(kP, c, wf, wc, wd, pw); };
  EXPECT_EQ(law(100.0, 100.0, 2e6).which, TorqueCase::kTracking);
  EXPECT_DOUBLE_EQ(law(101.0, 101.0, 2e6).torque, 2e6 / (0.936 * 100.0));
  EXPECT_EQ(law(10.0, 10.0, 2e6).which, TorqueCase::kCutIn);
  EXPECT_EQ(law(10.0, 10.0, 2e6).torque, 0.0);
  EXPECT_EQ(law(12.0, 12.0, 2e6).which, TorqueCase::kLinear);
  EXPECT_DOUBLE_EQ(law(12.0, 12.0, 2e6).torque, c.c_12 * (12.0 - 10.47));
  // The corrected speed decides between the linear and quadratic branches.
  EXPECT_EQ(law(12.0, 16.0, 2e6).which, TorqueCase::kOptimal);
  EXPECT_DOUBLE_EQ(law(50.0, 50.0, 2e6).torque, 1.75 * 2500.0);
  BaselineConfig raw = c;
  raw.torque_includes_efficiency = false;
  EXPECT_DOUBLE_EQ(torque_law(kP, raw, 101.0, 101.0, wd, 2e6).torque, 2e4);
}

TEST(Baseline, LiteralDegreesDiffersOnlyInPitchGains) {
  const BaselineConfig a;
  const BaselineConfig b = BaselineConfig::literal_degrees();
  EXPECT_NEAR(a.k_p / b.k_p, kDegPerRad, 1e-12);
  EXPECT_NEAR(a.k_i / b.k_i, kDegPerRad, 1e-12);
  EXPECT_NEAR(a.k_k / b.k_k, kDegPerRad, 1e-12);
  EXPECT_NEAR(b.c_theta_gb / a.c_theta_gb, kDegPerRad, 1e-12);
  EXPECT_EQ(a.c_m_star, b.c_m_star);
}

TEST(Baseline, InitializationReproducesThePitchAtZeroError) {
  BaselineController ctrl(kP, BaselineConfig{}, 0.004);
  const double pw = 3.35e6;
  const double wd = desired_speed(kP, BaselineConfig{}, pw);
  ctrl.initialize(wd, 5.0, 30000.0);
  EXPECT_NEAR(ctrl.integral() * BaselineConfig{}.k_i * ctrl.schedule_gain(5.0), 5.0, 1e-12);
  const BaselineOutput o = ctrl.step(wd, pw);
  EXPECT_NEAR(o.pitch_desired, 5.0, 1e-9);
  EXPECT_NEAR(o.pitch, 5.0, 1e-9);
}

TEST(BaselineProperty, OutputsRespectActuatorLimits) {
  testing_support::Rng rng(61);
  BaselineController ctrl(kP, BaselineConfig{}, 0.004);
  ctrl.initialize(110.0, 4.0, 20000.0);
  double pitch = 4.0;
  double torque = 20000.0;
  for (int k = 0; k < 100000; ++k) {
    const BaselineOutput o = ctrl.step(rng.uniform(5.0, 200.0), rng.uniform(0.0, 3.35e6));
    ASSERT_TRUE(kP.limits.pitch_deg.contains(o.pitch)) << k;
    ASSERT_TRUE(kP.limits.torque.contains(o.torque)) << k;
    ASSERT_TRUE(kP.limits.pitch_step_deg.contains(o.pitch - pitch)) << k;
    ASSERT_TRUE(kP.limits.torque_step.contains(o.torque - torque)) << k;
    ASSERT_TRUE(ctrl.integral_bounds().contains(ctrl.integral())) << k;
    pitch = o.pitch;
    torque = o.torque;
  }
}

TEST(Baseline, RejectsBadGains) {
  BaselineConfig c;
  c.k_i = 0.0;
  EXPECT_THROW(BaselineController(kP, c, 0.004), ConfigError);
  BaselineConfig d;
  d.t_theta = 0.003;
  EXPECT_THROW(BaselineController(kP, d, 0.004), ConfigError);
}
