#pragma once

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include "turbine_lq/aero.hpp"
#include "turbine_lq/common.hpp"

namespace turbine_lq {

class NoEquilibriumError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, long step)
      : std::runtime_error(what), step_(step) {}
  [[nodiscard]] long step() const { return step_; }

 private:
  long step_;
};

struct ActuatorLimits {
  Interval pitch_deg{1.09, 22.0};
  // Per-sample pitch change: 0.000488 rad per 4 ms step.
  Interval pitch_step_deg = Interval::symmetric(0.000488 * kDegPerRad);
  Interval torque{0.0, 33170.0};
  Interval torque_step = Interval::symmetric(6000.0);
};

struct TurbineParameters {
  double inertia = 39825631.0;  // kg m^2, rotor side
  double gear_ratio = 97.0;
  double efficiency = 0.936;
  RotorGeometry rotor{};
  ActuatorLimits limits{};
  double rated_speed = 119.31;      // rad/s, generator side
  double rated_torque = 30150.0;    // N m, generator side
  double rated_power = 3.35e6;      // W

  void validate() const {
    rotor.validate();
    if (!(inertia > 0.0)) throw ConfigError("inertia must be positive");
    if (!(gear_ratio > 0.0)) throw ConfigError("gear ratio must be positive");
    if (!(efficiency > 0.0 && efficiency <= 1.0)) {
      throw ConfigError("efficiency must lie in (0, 1]");
    }
    if (!(rated_speed > 0.0 && rated_torque > 0.0 && rated_power > 0.0)) {
      throw ConfigError("rated speed, torque and power must be positive");
    }
    if (!(limits.pitch_step_deg.upper() > 0.0 &&
          limits.pitch_step_deg.lower() < 0.0 &&
          limits.torque_step.upper() > 0.0 && limits.torque_step.lower() < 0.0)) {
      throw ConfigError("slew intervals must contain zero in their interior");
    }
  }
};

struct Equilibrium {
  double speed = 0.0;   // rad/s
  double pitch = 0.0;   // deg
  double torque = 0.0;  // N m
  double wind = 0.0;    // m/s
};

// Generator speed derivative in rad/s^2.
[[nodiscard]] inline double plant_rhs(const TurbineParameters& p,
                                      const CpPolynomial& cp, double omega,
                                      double pitch, double torque, double v) {
  if (!(omega > 0.0)) {
    throw std::domain_error("generator speed must be positive");
  }
  if (!(v > 0.0)) throw std::domain_error("wind speed must be positive");
  const double n2 = p.gear_ratio * p.gear_ratio;
  const double r = p.rotor.radius;
  const double k0 = p.rotor.air_density * kPi * r * r * n2 / (2.0 * p.inertia);
  const double lambda = r * omega / (p.gear_ratio * v);
  return k0 * v * v * v / omega * cp(lambda, pitch) - n2 / p.inertia * torque;
}

[[nodiscard]] inline double electrical_power(const TurbineParameters& p,
                                             double omega, double torque) {
  return p.efficiency * omega * torque;
}

// One RK4 step with inputs held over the interval.
[[nodiscard]] inline double integrate_step(const TurbineParameters& p,
                                           const CpPolynomial& cp, double omega,
                                           double pitch, double torque,
                                           double v, double ts) {
  if (!(ts > 0.0)) throw ConfigError("integration step must be positive");
  auto f = [&](double w) { return plant_rhs(p, cp, w, pitch, torque, v); };
  double next = 0.0;
  try {
    const double k1 = f(omega);
    const double k2 = f(omega + 0.5 * ts * k1);
    const double k3 = f(omega + 0.5 * ts * k2);
    const double k4 = f(omega + ts * k3);
    next = omega + ts / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  } catch (const std::domain_error& e) {
    throw DivergenceError(std::string("plant left its domain: ") + e.what(), -1);
  }
  if (!(next > 0.0 && next <= 3.0 * p.rated_speed)) {
    std::ostringstream msg;
    msg << "generator speed " << next << " rad/s left (0, "
        << 3.0 * p.rated_speed << "]";
    throw DivergenceError(msg.str(), -1);
  }
  return next;
}

// Stable equilibrium speed for frozen inputs. The quartic surface admits
// several roots; the largest one with df/domega < 0 is returned.
[[nodiscard]] inline Equilibrium find_equilibrium(const TurbineParameters& p,
                                                  const CpPolynomial& cp,
                                                  double pitch, double torque,
                                                  double v) {
  if (!(v > 0.0)) throw ConfigError("equilibrium wind speed must be positive");
  auto f = [&](double w) { return plant_rhs(p, cp, w, pitch, torque, v); };
  constexpr int kCells = 4000;
  const double lo = 0.05 * p.rated_speed;
  const double hi = 2.0 * p.rated_speed;
  const double h = (hi - lo) / kCells;
  double a = 0.0;
  double b = 0.0;
  bool found = false;
  double f_prev = f(lo);
  for (int i = 1; i <= kCells; ++i) {
    const double w = lo + i * h;
    const double fw = f(w);
    if (f_prev > 0.0 && fw <= 0.0) {
      a = w - h;
      b = w;
      found = true;
    }
    f_prev = fw;
  }
  if (!found) {
    std::ostringstream msg;
    msg << "no stable equilibrium in [" << lo << ", " << hi
        << "] rad/s for pitch " << pitch << " deg, torque " << torque
        << " N m, wind " << v << " m/s";
    throw NoEquilibriumError(msg.str());
  }
  // Bisection down to adjacent doubles keeps f(a) > 0 >= f(b).
  while (true) {
    const double m = 0.5 * (a + b);
    if (m <= a || m >= b) break;
    if (f(m) > 0.0) {
      a = m;
    } else {
      b = m;
    }
  }
  const double root = std::abs(f(a)) < std::abs(f(b)) ? a : b;
  return Equilibrium{root, pitch, torque, v};
}

struct LinearPlantModel {
  Equilibrium anchor;
  double ts = 0.004;
  double a_c = 0.0;
  double b_c_pitch = 0.0;   // rad/s^2 per deg
  double b_c_torque = 0.0;  // rad/s^2 per N m
  double f_c = 0.0;         // rad/s^2 per m/s
  double a_d = 0.0;
  double b_d_pitch = 0.0;
  double b_d_torque = 0.0;
  double f_d = 0.0;

  LinearPlantModel() = default;
  LinearPlantModel(const Equilibrium& eq, double sample_time, double ac,
                   double bc_pitch, double bc_torque, double fc)
      : anchor(eq),
        ts(sample_time),
        a_c(ac),
        b_c_pitch(bc_pitch),
        b_c_torque(bc_torque),
        f_c(fc),
        a_d(1.0 + sample_time * ac),
        b_d_pitch(sample_time * bc_pitch),
        b_d_torque(sample_time * bc_torque),
        f_d(sample_time * fc) {}
};

// Analytic Jacobian of plant_rhs at an equilibrium, discretized by forward
// Euler.
[[nodiscard]] inline LinearPlantModel linearize(const TurbineParameters& p,
                                                const CpPolynomial& cp,
                                                const Equilibrium& eq,
                                                double ts) {
  if (!(ts > 0.0)) throw ConfigError("sampling time must be positive");
  if (!(eq.speed > 0.0 && eq.wind > 0.0)) {
    throw ConfigError("equilibrium speed and wind must be positive");
  }
  const double n = p.gear_ratio;
  const double r = p.rotor.radius;
  const double k0 = p.rotor.air_density * kPi * r * r * n * n / (2.0 * p.inertia);
  const double w = eq.speed;
  const double v = eq.wind;
  const double lambda = r * w / (n * v);
  const double c = cp.raw(lambda, eq.pitch);
  if (!(c > 0.0)) {
    std::ostringstream msg;
    msg << "Cp is clipped at lambda " << lambda << ", pitch " << eq.pitch
        << " deg; the linearization is undefined there";
    throw ConfigError(msg.str());
  }
  const double c_l = cp.d_lambda(lambda, eq.pitch);
  const double c_t = cp.d_pitch(lambda, eq.pitch);
  const double v3 = v * v * v;
  const double ac = k0 * v3 * (-c / (w * w) + c_l * r / (n * v * w));
  const double bc_pitch = k0 * v3 / w * c_t;
  const double bc_torque = -n * n / p.inertia;
  const double fc = k0 * (3.0 * v * v * c / w - v * c_l * r / n);
  return LinearPlantModel(eq, ts, ac, bc_pitch, bc_torque, fc);
}

}  // namespace turbine_lq
