#pragma once

#include <cmath>
#include <complex>
#include <sstream>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "turbine_lq/common.hpp"
#include "turbine_lq/dynamics.hpp"

namespace turbine_lq {

using Vec2 = Eigen::Vector2d;
using Vec4 = Eigen::Vector4d;
using Mat2 = Eigen::Matrix2d;
using Mat4 = Eigen::Matrix4d;
using Mat42 = Eigen::Matrix<double, 4, 2>;
using Mat24 = Eigen::Matrix<double, 2, 4>;

class DareError : public std::runtime_error {
 public:
  DareError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  [[nodiscard]] double residual() const { return residual_; }

 private:
  double residual_;
};

// ---------------------------------------------------------------------------
// Riccati equation
// ---------------------------------------------------------------------------

// A'SA - S - A'SB (B'SB + R)^-1 B'SA + Q
[[nodiscard]] inline Eigen::MatrixXd dare_residual_matrix(
    const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
    const Eigen::MatrixXd& q, const Eigen::MatrixXd& r,
    const Eigen::MatrixXd& s) {
  const Eigen::MatrixXd bsa = b.transpose() * s * a;
  const Eigen::MatrixXd gram = b.transpose() * s * b + r;
  return a.transpose() * s * a - s - bsa.transpose() * gram.ldlt().solve(bsa) +
         q;
}

[[nodiscard]] inline double dare_residual(const Eigen::MatrixXd& a,
                                          const Eigen::MatrixXd& b,
                                          const Eigen::MatrixXd& q,
                                          const Eigen::MatrixXd& r,
                                          const Eigen::MatrixXd& s) {
  return dare_residual_matrix(a, b, q, r, s).norm();
}

struct DareSolution {
  Eigen::MatrixXd s;
  int iterations = 0;
  double residual = 0.0;
};

inline void check_weights(const Eigen::MatrixXd& q, const Eigen::MatrixXd& r) {
  const double q_scale = std::max(1.0, q.norm());
  if ((q - q.transpose()).norm() > 1e-12 * q_scale) {
    throw ConfigError("Q must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> qe(q);
  if (qe.eigenvalues().minCoeff() < -1e-12 * q_scale) {
    throw ConfigError("Q must be positive semidefinite");
  }
  if ((r - r.transpose()).norm() > 1e-12 * std::max(1.0, r.norm())) {
    throw ConfigError("R must be symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(r);
  if (llt.info() != Eigen::Success) {
    throw ConfigError("R must be positive definite");
  }
}

// Structure-preserving doubling. Each sweep squares the underlying
// symplectic iteration, so convergence is quadratic even when the closed
// loop has poles very close to the unit circle, where the plain Riccati
// recursion needs millions of steps.
[[nodiscard]] inline DareSolution solve_dare(const Eigen::MatrixXd& a,
                                             const Eigen::MatrixXd& b,
                                             const Eigen::MatrixXd& q,
                                             const Eigen::MatrixXd& r,
                                             int max_iterations = 200,
                                             double tolerance = 1e-14) {
  const auto n = a.rows();
  if (a.cols() != n || b.rows() != n || q.rows() != n || q.cols() != n ||
      r.rows() != b.cols() || r.cols() != b.cols()) {
    throw ConfigError("DARE matrix dimensions are inconsistent");
  }
  check_weights(q, r);
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd ak = a;
  Eigen::MatrixXd g = b * r.llt().solve(b.transpose());
  Eigen::MatrixXd h = q;
  DareSolution out;
  for (int it = 1; it <= max_iterations; ++it) {
    const Eigen::PartialPivLU<Eigen::MatrixXd> w(eye + g * h);
    const Eigen::MatrixXd w_a = w.solve(ak);
    const Eigen::MatrixXd w_g = w.solve(g);
    const Eigen::MatrixXd h_next = h + ak.transpose() * h * w_a;
    g = g + ak * w_g * ak.transpose();
    ak = ak * w_a;
    g = 0.5 * (g + g.transpose());
    const double change = (h_next - h).norm();
    h = 0.5 * (h_next + h_next.transpose());
    if (!h.allFinite()) break;
    if (change <= tolerance * std::max(1.0, h.norm())) {
      out.s = h;
      out.iterations = it;
      out.residual = dare_residual(a, b, q, r, h);
      if (out.residual > 1e-8 * (1.0 + h.norm())) {
        std::ostringstream msg;
        msg << "DARE iteration converged but the residual " << out.residual
            << " exceeds 1e-8 (1 + |S|)";
        throw DareError(msg.str(), out.residual);
      }
      return out;
    }
  }
  const double res = h.allFinite() ? dare_residual(a, b, q, r, h) : INFINITY;
  std::ostringstream msg;
  msg << "DARE did not converge in " << max_iterations
      << " doubling steps, residual " << res;
  throw DareError(msg.str(), res);
}

// (B'SB + R)^-1 B'SA
[[nodiscard]] inline Eigen::MatrixXd compute_gain(const Eigen::MatrixXd& a,
                                                  const Eigen::MatrixXd& b,
                                                  const Eigen::MatrixXd& r,
                                                  const Eigen::MatrixXd& s) {
  const Eigen::MatrixXd gram = b.transpose() * s * b + r;
  return gram.ldlt().solve(b.transpose() * s * a);
}

[[nodiscard]] inline double spectral_radius(const Eigen::MatrixXd& m) {
  return m.eigenvalues().cwiseAbs().maxCoeff();
}

// Popov-Belevitch-Hautus test: rank [lambda I - A, B] = n at every
// eigenvalue of A.
[[nodiscard]] inline bool is_controllable(const Eigen::MatrixXd& a,
                                          const Eigen::MatrixXd& b,
                                          double rel_tol = 1e-10) {
  using Cx = Eigen::MatrixXcd;
  const auto n = a.rows();
  const Eigen::VectorXcd eig = a.eigenvalues();
  for (Eigen::Index i = 0; i < n; ++i) {
    Cx pencil(n, n + b.cols());
    pencil.leftCols(n) = eig(i) * Cx::Identity(n, n) - a.cast<std::complex<double>>();
    pencil.rightCols(b.cols()) = b.cast<std::complex<double>>();
    // Equilibrate rows so that badly scaled states do not hide a rank drop.
    for (Eigen::Index row = 0; row < n; ++row) {
      const double norm = pencil.row(row).norm();
      if (norm > 0.0) pencil.row(row) /= norm;
    }
    Eigen::JacobiSVD<Cx> svd(pencil);
    const auto& sv = svd.singularValues();
    if (sv(n - 1) <= rel_tol * sv(0)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Augmented model and design
// ---------------------------------------------------------------------------

// Units the weights Q and R are expressed in. The plant uses degrees and
// N m; a design in radians and kN m sees pitch_deg = 180/pi and
// torque_nm = 1000.
struct DesignUnits {
  double pitch_deg = 1.0;
  double torque_nm = 1.0;

  void validate() const {
    if (!(pitch_deg > 0.0 && torque_nm > 0.0)) {
      throw ConfigError("design unit scales must be positive");
    }
  }
  [[nodiscard]] Vec4 state_scale() const { return {1.0, 1.0, pitch_deg, torque_nm}; }
  [[nodiscard]] Vec2 input_scale() const { return {pitch_deg, torque_nm}; }
};

// State [speed deviation, speed error integral, pitch, torque]; input is the
// rate of the two actuator commands; disturbance is [wind, desired speed].
struct AugmentedModel {
  Mat4 a = Mat4::Identity();
  Mat42 b = Mat42::Zero();
  Mat42 f = Mat42::Zero();
  double ts = 0.0;
  LinearPlantModel plant;
  DesignUnits units;
};

[[nodiscard]] inline AugmentedModel build_augmented(const LinearPlantModel& lin,
                                                    DesignUnits units = {}) {
  units.validate();
  AugmentedModel m;
  m.ts = lin.ts;
  m.plant = lin;
  m.units = units;
  m.a.setIdentity();
  m.a(0, 0) = lin.a_d;
  m.a(0, 2) = lin.b_d_pitch * units.pitch_deg;
  m.a(0, 3) = lin.b_d_torque * units.torque_nm;
  m.a(1, 0) = -lin.ts;
  m.b.setZero();
  m.b(2, 0) = lin.ts;
  m.b(3, 1) = lin.ts;
  m.f.setZero();
  m.f(0, 0) = lin.f_d;
  m.f(1, 1) = lin.ts;
  if (!is_controllable(m.a, m.b)) {
    throw ConfigError("augmented model is not controllable at this equilibrium");
  }
  return m;
}

struct LqWeights {
  Vec4 q_diag = Vec4::Ones();
  Vec2 r_diag = Vec2::Ones();

  [[nodiscard]] Mat4 q() const { return q_diag.asDiagonal(); }
  [[nodiscard]] Mat2 r() const { return r_diag.asDiagonal(); }
};

struct LqDesign {
  AugmentedModel model;
  Mat4 q = Mat4::Zero();
  Mat2 r = Mat2::Identity();
  Mat4 s = Mat4::Zero();
  Mat24 k = Mat24::Zero();       // design units
  Mat24 k_plant = Mat24::Zero(); // degrees and N m
  int iterations = 0;
  double residual = 0.0;
  double spectral_radius = 0.0;

  [[nodiscard]] const Equilibrium& anchor() const { return model.plant.anchor; }
};

[[nodiscard]] inline LqDesign design_lq(const LinearPlantModel& lin,
                                        const Mat4& q, const Mat2& r,
                                        DesignUnits units = {}) {
  LqDesign d;
  d.model = build_augmented(lin, units);
  d.q = q;
  d.r = r;
  const DareSolution sol = solve_dare(d.model.a, d.model.b, q, r);
  d.s = sol.s;
  d.iterations = sol.iterations;
  d.residual = sol.residual;
  d.k = compute_gain(d.model.a, d.model.b, r, d.s);
  d.spectral_radius = spectral_radius(d.model.a - d.model.b * d.k);
  if (!(d.spectral_radius < 1.0)) {
    std::ostringstream msg;
    msg << "LQ closed loop is not stable, spectral radius " << d.spectral_radius;
    throw DareError(msg.str(), d.residual);
  }
  d.k_plant = units.input_scale().asDiagonal() * d.k *
              units.state_scale().cwiseInverse().asDiagonal();
  return d;
}

// ---------------------------------------------------------------------------
// Gain schedule and control law
// ---------------------------------------------------------------------------

class GainSchedule {
 public:
  GainSchedule(LqDesign low, LqDesign high, double v_low, double v_high)
      : designs_{std::move(low), std::move(high)}, v_low_(v_low), v_high_(v_high) {
    if (!(v_low < v_high)) {
      throw ConfigError("switching thresholds require V_low < V_high");
    }
  }

  // 1 below v_low, 2 above v_high, otherwise unchanged.
  int select(double v) {
    if (v < v_low_) {
      active_ = 1;
    } else if (v > v_high_) {
      active_ = 2;
    }
    return active_;
  }

  void set_active(int index) {
    if (index != 1 && index != 2) throw ConfigError("gain index must be 1 or 2");
    active_ = index;
  }
  [[nodiscard]] int active() const { return active_; }
  [[nodiscard]] const LqDesign& design(int index) const {
    return designs_[static_cast<std::size_t>(index - 1)];
  }
  [[nodiscard]] const LqDesign& active_design() const { return design(active_); }
  [[nodiscard]] double v_low() const { return v_low_; }
  [[nodiscard]] double v_high() const { return v_high_; }

 private:
  std::array<LqDesign, 2> designs_;
  double v_low_;
  double v_high_;
  int active_ = 1;
};

struct ReferenceSample {
  double speed = 0.0;   // rad/s
  double pitch = 0.0;   // deg
  double torque = 0.0;  // N m
};

[[nodiscard]] inline Vec4 desired_augmented_state(const ReferenceSample& ref,
                                                  const Equilibrium& anchor) {
  return {ref.speed - anchor.speed, 0.0, ref.pitch - anchor.pitch,
          ref.torque - anchor.torque};
}

struct ActuatorCommand {
  double pitch = 0.0;   // deg
  double torque = 0.0;  // N m
};

// Incremental law u(k) = mu(k-1) + Ts K (x^d - x) + u^s followed by the
// actuator limits. mu(k-1) is re-based on the active equilibrium, so the
// pre-limit command is the previous command plus Ts K (x^d - x).
class LqLaw {
 public:
  LqLaw(GainSchedule schedule, ActuatorLimits limits, double ts)
      : schedule_(std::move(schedule)), limits_(limits), ts_(ts) {}

  void initialize(const ActuatorCommand& applied, double v) {
    previous_ = applied;
    z_ = 0.0;
    if (v < schedule_.v_low() || v > schedule_.v_high()) {
      schedule_.select(v);
    } else {
      schedule_.set_active(1);
    }
  }

  ActuatorCommand step(const ReferenceSample& ref, double omega, double v) {
    schedule_.select(v);
    const LqDesign& d = schedule_.active_design();
    const Equilibrium& eq = d.anchor();
    const Vec4 x{omega - eq.speed, z_, previous_.pitch - eq.pitch,
                 previous_.torque - eq.torque};
    const Vec4 xd = desired_augmented_state(ref, eq);
    const Vec2 mu_rate = d.k_plant * (xd - x);
    const Vec2 mu_prev{previous_.pitch - eq.pitch, previous_.torque - eq.torque};
    const Vec2 target = mu_prev + ts_ * mu_rate + Vec2{eq.pitch, eq.torque};
    ActuatorCommand out;
    out.pitch = rate_limited_update(previous_.pitch, target(0),
                                    limits_.pitch_deg, limits_.pitch_step_deg);
    out.torque = rate_limited_update(previous_.torque, target(1), limits_.torque,
                                     limits_.torque_step);
    z_ += ts_ * (ref.speed - omega);
    previous_ = out;
    return out;
  }

  [[nodiscard]] int active() const { return schedule_.active(); }
  [[nodiscard]] double integral() const { return z_; }
  [[nodiscard]] const GainSchedule& schedule() const { return schedule_; }

 private:
  GainSchedule schedule_;
  ActuatorLimits limits_;
  double ts_;
  double z_ = 0.0;
  ActuatorCommand previous_{};
};

}  // namespace turbine_lq
