#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "turbine_lq/common.hpp"
#include "turbine_lq/dynamics.hpp"

namespace turbine_lq {

// How the filtered correction term enters the pitch loop's speed error.
enum class PitchCorrection {
  kPositivePart,  // + max(dw, 0), the same clamp the torque path uses
  kNegativePart,  // + min(dw, 0)
  kNone,
};

// Gains with angles in degrees. The tabulated pitch gains and the pitch
// weight of the correction term are radian quantities (the reference
// turbine's controller files are in SI units); the defaults are those values
// converted. literal_degrees() reads the same numbers as degrees instead.
struct BaselineConfig {
  double c_m_star = 1.75;                  // N m s^2
  double c_12 = 82.47;                     // N m s
  double omega_ci = 10.47;                 // rad/s
  double omega_r2 = 15.71;                 // rad/s
  double c_theta_gb = 30.0 / kDegPerRad;   // (rad/s) / deg
  double c_m_gb = 0.0001;                  // (rad/s) / (N m)
  double t_m = 1.0;                        // s
  double t_theta = 0.133;                  // s
  double t_gb = 10.0;                      // s
  double k_p = 0.133 * kDegPerRad;         // deg / (rad/s)
  double k_i = 0.004 * kDegPerRad;         // deg / rad
  double k_k = 0.174 * kDegPerRad;         // deg
  bool torque_includes_efficiency = true;
  PitchCorrection pitch_correction = PitchCorrection::kNegativePart;

  static BaselineConfig literal_degrees() {
    BaselineConfig c;
    c.c_theta_gb = 30.0;
    c.k_p = 0.133;
    c.k_i = 0.004;
    c.k_k = 0.174;
    return c;
  }

  void validate(double ts) const {
    if (!(c_m_star > 0.0 && c_12 > 0.0 && omega_ci > 0.0 && omega_r2 > 0.0)) {
      throw ConfigError("baseline torque parameters must be positive");
    }
    if (!(c_theta_gb >= 0.0 && c_m_gb >= 0.0)) {
      throw ConfigError("baseline correction gains must be nonnegative");
    }
    if (!(k_p > 0.0 && k_i > 0.0 && k_k > 0.0)) {
      throw ConfigError("baseline pitch gains must be positive");
    }
    (void)make_alpha(ts, t_m, AlphaConvention::kMinus);
    (void)make_alpha(ts, t_theta, AlphaConvention::kMinus);
    (void)make_alpha(ts, t_gb, AlphaConvention::kMinus);
  }
};

[[nodiscard]] inline double desired_speed(const TurbineParameters& p,
                                          const BaselineConfig& c,
                                          double power) {
  if (!(power >= 0.0)) throw std::domain_error("demanded power is negative");
  return std::min(std::cbrt(power / (p.efficiency * c.c_m_star)), p.rated_speed);
}

// Correction term before filtering.
[[nodiscard]] inline double correction_term(const TurbineParameters& p,
                                            const BaselineConfig& c,
                                            double pitch_prev,
                                            double torque_prev) {
  return c.c_theta_gb * (pitch_prev - p.limits.pitch_deg.lower()) +
         c.c_m_gb * (torque_prev - p.rated_torque);
}

enum class TorqueCase { kTracking = 1, kCutIn = 2, kLinear = 3, kOptimal = 4 };

struct TorqueLaw {
  double torque = 0.0;
  TorqueCase which = TorqueCase::kTracking;
};

// Four-case torque law, conditions checked in order.
[[nodiscard]] inline TorqueLaw torque_law(const TurbineParameters& p,
                                          const BaselineConfig& c,
                                          double speed_filtered,
                                          double speed_corrected,
                                          double speed_desired, double power) {
  if (speed_filtered >= speed_desired) {
    if (speed_desired <= 0.0) {
      if (power > 0.0) {
        throw std::domain_error("zero desired speed with positive demand");
      }
      return {0.0, TorqueCase::kTracking};
    }
    const double eta = c.torque_includes_efficiency ? p.efficiency : 1.0;
    return {power / (eta * speed_desired), TorqueCase::kTracking};
  }
  if (speed_filtered <= c.omega_ci) return {0.0, TorqueCase::kCutIn};
  if (speed_corrected < c.omega_r2) {
    return {c.c_12 * (speed_filtered - c.omega_ci), TorqueCase::kLinear};
  }
  return {c.c_m_star * speed_filtered * speed_filtered, TorqueCase::kOptimal};
}

struct BaselineOutput {
  double pitch = 0.0;           // applied, deg
  double torque = 0.0;          // applied, N m
  double speed_desired = 0.0;   // rad/s
  double pitch_desired = 0.0;   // before limits, deg
  double torque_desired = 0.0;  // before limits, N m
  TorqueCase torque_case = TorqueCase::kTracking;
};

class BaselineController {
 public:
  BaselineController(const TurbineParameters& p, const BaselineConfig& c,
                     double ts)
      : p_(p), c_(c), ts_(ts) {
    c_.validate(ts);
    gb_ = LowpassFilter(make_alpha(ts, c.t_gb, AlphaConvention::kMinus));
    speed_m_ = LowpassFilter(make_alpha(ts, c.t_m, AlphaConvention::kMinus));
    speed_theta_ = LowpassFilter(make_alpha(ts, c.t_theta, AlphaConvention::kMinus));
  }

  void initialize(double omega, double pitch, double torque) {
    pitch_prev_ = pitch;
    torque_prev_ = torque;
    speed_m_.reset(omega);
    speed_theta_.reset(omega);
    gb_.reset(correction_term(p_, c_, pitch, torque));
    integral_ = pitch / (c_.k_i * schedule_gain(pitch));
  }

  BaselineOutput step(double omega, double power) {
    BaselineOutput out;
    const double w_d = desired_speed(p_, c_, power);
    out.speed_desired = w_d;

    const double dw = gb_.step(correction_term(p_, c_, pitch_prev_, torque_prev_));
    const double boost = std::max(dw, 0.0);

    const double w_m = speed_m_.step(omega);
    const TorqueLaw law = torque_law(p_, c_, w_m, w_m + boost, w_d, power);
    out.torque_desired = law.torque;
    out.torque_case = law.which;
    out.torque = rate_limited_update(torque_prev_, law.torque, p_.limits.torque,
                                     p_.limits.torque_step);

    double pitch_shift = 0.0;
    switch (c_.pitch_correction) {
      case PitchCorrection::kPositivePart: pitch_shift = boost; break;
      case PitchCorrection::kNegativePart: pitch_shift = std::min(dw, 0.0); break;
      case PitchCorrection::kNone: break;
    }
    const double w_theta = speed_theta_.step(omega);
    const double e = w_theta + pitch_shift - w_d;
    const double g_k = schedule_gain(pitch_prev_);
    const Interval e_bounds(p_.limits.pitch_deg.lower() / (g_k * c_.k_i),
                            p_.limits.pitch_deg.upper() / (g_k * c_.k_i));
    integral_ = sat(integral_ + ts_ * e, e_bounds);
    last_bounds_ = e_bounds;
    out.pitch_desired = g_k * (c_.k_p * e + c_.k_i * integral_);
    out.pitch = rate_limited_update(pitch_prev_, out.pitch_desired,
                                    p_.limits.pitch_deg, p_.limits.pitch_step_deg);

    pitch_prev_ = out.pitch;
    torque_prev_ = out.torque;
    return out;
  }

  [[nodiscard]] double schedule_gain(double pitch) const {
    return 1.0 / (1.0 + pitch / c_.k_k);
  }
  [[nodiscard]] double integral() const { return integral_; }
  // Bounds applied to the integral at the most recent step.
  [[nodiscard]] const Interval& integral_bounds() const { return last_bounds_; }
  [[nodiscard]] const BaselineConfig& config() const { return c_; }

 private:
  TurbineParameters p_;
  BaselineConfig c_;
  double ts_;
  LowpassFilter gb_;
  LowpassFilter speed_m_;
  LowpassFilter speed_theta_;
  double integral_ = 0.0;
  Interval last_bounds_ = Interval::nonnegative();
  double pitch_prev_ = 0.0;
  double torque_prev_ = 0.0;
};

}  // namespace turbine_lq
