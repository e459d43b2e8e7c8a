#pragma once

#include <array>
#include <cmath>
#include <istream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "turbine_lq/common.hpp"

namespace turbine_lq {

struct RotorGeometry {
  double radius = 65.0;        // m
  double air_density = 1.225;  // kg/m^3

  void validate() const {
    if (!(radius > 0.0)) throw ConfigError("rotor radius must be positive");
    if (!(air_density > 0.0)) throw ConfigError("air density must be positive");
  }
  [[nodiscard]] double swept_area() const { return kPi * radius * radius; }
};

[[nodiscard]] inline double wind_power(const RotorGeometry& geom, double v) {
  if (!(v > 0.0)) throw std::domain_error("wind speed must be positive");
  return 0.5 * geom.air_density * geom.swept_area() * v * v * v;
}

[[nodiscard]] inline double tip_speed_ratio(const RotorGeometry& geom,
                                            double omega_gen, double gear_ratio,
                                            double v) {
  if (!(v > 0.0)) throw std::domain_error("wind speed must be positive");
  return geom.radius * omega_gen / (gear_ratio * v);
}

// Rectangle of (tip-speed ratio, pitch in degrees) the surface is trusted on.
struct CpDomain {
  double lambda_min = 1.0;
  double lambda_max = 13.0;
  double pitch_min = 1.09;
  double pitch_max = 22.0;

  void validate() const {
    if (!(lambda_min < lambda_max) || !(pitch_min < pitch_max)) {
      throw ConfigError("Cp domain must be a nonempty rectangle");
    }
  }
  [[nodiscard]] bool contains(double lambda, double pitch) const {
    return lambda >= lambda_min && lambda <= lambda_max &&
           pitch >= pitch_min && pitch <= pitch_max;
  }
};

struct CpSample {
  double lambda;
  double pitch_deg;
  double cp;
};

// Quartic bivariate power coefficient surface, pitch in degrees. Terms are
// ordered by total degree, and within a degree by falling power of lambda:
// 1, l, t, l^2, l t, t^2, l^3, l^2 t, l t^2, t^3, l^4, l^3 t, l^2 t^2, ...
class CpPolynomial {
 public:
  static constexpr int kTerms = 15;
  static constexpr std::array<std::array<int, 2>, kTerms> kExponents{{
      {0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}, {3, 0}, {2, 1},
      {1, 2}, {0, 3}, {4, 0}, {3, 1}, {2, 2}, {1, 3}, {0, 4},
  }};

  CpPolynomial(const std::array<double, kTerms>& coefficients, CpDomain domain)
      : c_(coefficients), domain_(domain) {
    domain_.validate();
    check_betz();
  }

  static std::array<double, kTerms> reference_coefficients() {
    return {0.098,     -0.150,    -0.011,     0.061,     0.0125,
            0.000053,  -0.00615,  -0.00184,   -0.000338, 0.0000407,
            0.000184,  0.000106,  -0.0000515, 0.0000143, -0.00000197};
  }

  [[nodiscard]] double raw(double lambda, double pitch) const {
    const auto lp = powers(lambda);
    const auto tp = powers(pitch);
    double sum = 0.0;
    for (int i = 0; i < kTerms; ++i) {
      sum += c_[i] * lp[kExponents[i][0]] * tp[kExponents[i][1]];
    }
    return sum;
  }

  [[nodiscard]] double operator()(double lambda, double pitch) const {
    return std::max(raw(lambda, pitch), 0.0);
  }

  // Partial derivatives of the unclipped polynomial.
  [[nodiscard]] double d_lambda(double lambda, double pitch) const {
    const auto lp = powers(lambda);
    const auto tp = powers(pitch);
    double sum = 0.0;
    for (int i = 0; i < kTerms; ++i) {
      const int a = kExponents[i][0];
      if (a > 0) sum += c_[i] * a * lp[a - 1] * tp[kExponents[i][1]];
    }
    return sum;
  }

  [[nodiscard]] double d_pitch(double lambda, double pitch) const {
    const auto lp = powers(lambda);
    const auto tp = powers(pitch);
    double sum = 0.0;
    for (int i = 0; i < kTerms; ++i) {
      const int b = kExponents[i][1];
      if (b > 0) sum += c_[i] * b * lp[kExponents[i][0]] * tp[b - 1];
    }
    return sum;
  }

  [[nodiscard]] const std::array<double, kTerms>& coefficients() const {
    return c_;
  }
  [[nodiscard]] const CpDomain& domain() const { return domain_; }

  // Tip-speed ratio maximizing Cp at a fixed pitch inside the domain. A
  // coarse scan guards against multimodality, then golden-section search
  // refines inside the winning cell.
  [[nodiscard]] double optimal_tip_speed_ratio(double pitch) const {
    if (pitch < domain_.pitch_min || pitch > domain_.pitch_max) {
      throw std::domain_error("pitch " + std::to_string(pitch) +
                              " deg lies outside the Cp domain");
    }
    constexpr int kScan = 400;
    const double lo = domain_.lambda_min;
    const double hi = domain_.lambda_max;
    const double h = (hi - lo) / kScan;
    int best = 0;
    double best_cp = (*this)(lo, pitch);
    for (int i = 1; i <= kScan; ++i) {
      const double cp = (*this)(lo + i * h, pitch);
      if (cp > best_cp) {
        best_cp = cp;
        best = i;
      }
    }
    double a = lo + std::max(best - 1, 0) * h;
    double b = lo + std::min(best + 1, kScan) * h;
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = (*this)(x1, pitch);
    double f2 = (*this)(x2, pitch);
    while (b - a > 1e-10) {
      if (f1 < f2) {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + inv_phi * (b - a);
        f2 = (*this)(x2, pitch);
      } else {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - inv_phi * (b - a);
        f1 = (*this)(x1, pitch);
      }
    }
    const double mid = 0.5 * (a + b);
    return (*this)(mid, pitch) >= best_cp ? mid : lo + best * h;
  }

 private:
  static std::array<double, 5> powers(double x) {
    return {1.0, x, x * x, x * x * x, x * x * x * x};
  }

  void check_betz() const {
    constexpr int kGrid = 200;
    for (int i = 0; i < kGrid; ++i) {
      const double l = domain_.lambda_min +
                       (domain_.lambda_max - domain_.lambda_min) * i / (kGrid - 1);
      for (int j = 0; j < kGrid; ++j) {
        const double t = domain_.pitch_min +
                         (domain_.pitch_max - domain_.pitch_min) * j / (kGrid - 1);
        if ((*this)(l, t) >= kBetzLimit) {
          std::ostringstream msg;
          msg << "Cp surface reaches " << (*this)(l, t) << " at lambda " << l
              << ", pitch " << t << " deg, above the Betz limit";
          throw ConfigError(msg.str());
        }
      }
    }
  }

  std::array<double, kTerms> c_;
  CpDomain domain_;
};

[[nodiscard]] inline CpPolynomial reference_cp() {
  return CpPolynomial(CpPolynomial::reference_coefficients(), CpDomain{});
}

// Ordinary least squares on the quartic basis.
[[nodiscard]] inline CpPolynomial fit_cp_polynomial(
    std::span<const CpSample> samples, CpDomain domain) {
  if (samples.size() < static_cast<std::size_t>(CpPolynomial::kTerms)) {
    throw ConfigError("need at least 15 Cp samples to fit the surface");
  }
  const auto n = static_cast<Eigen::Index>(samples.size());
  Eigen::MatrixXd basis(n, CpPolynomial::kTerms);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& s = samples[static_cast<std::size_t>(r)];
    for (int i = 0; i < CpPolynomial::kTerms; ++i) {
      basis(r, i) = std::pow(s.lambda, CpPolynomial::kExponents[i][0]) *
                    std::pow(s.pitch_deg, CpPolynomial::kExponents[i][1]);
    }
    rhs(r) = s.cp;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(basis);
  if (qr.rank() < CpPolynomial::kTerms) {
    throw ConfigError("Cp samples do not determine all 15 coefficients");
  }
  const Eigen::VectorXd x = qr.solve(rhs);
  std::array<double, CpPolynomial::kTerms> c{};
  for (int i = 0; i < CpPolynomial::kTerms; ++i) c[i] = x(i);
  return CpPolynomial(c, domain);
}

// Reads "lambda,pitch_deg,cp" rows; the header line is required.
[[nodiscard]] inline std::vector<CpSample> read_cp_samples(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("lambda,pitch_deg,cp", 0) != 0) {
    throw ConfigError("Cp sample file must start with 'lambda,pitch_deg,cp'");
  }
  std::vector<CpSample> out;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    std::istringstream fields(line);
    CpSample s{};
    char c1 = 0;
    char c2 = 0;
    if (!(fields >> s.lambda >> c1 >> s.pitch_deg >> c2 >> s.cp) || c1 != ',' ||
        c2 != ',') {
      throw ConfigError("malformed Cp sample on line " + std::to_string(row));
    }
    out.push_back(s);
  }
  return out;
}

// The exponential power coefficient family
//   (a1 / li + a2 t + a3) exp(a4 / li),  1/li = 1/(l + a5) - a6/(t^3 + 1).
struct ExponentialCp {
  double a1 = 0.0;
  double a2 = 0.0;
  double a3 = 0.0;
  double a4 = 0.0;
  double a5 = 0.0;
  double a6 = 0.0;

  [[nodiscard]] double operator()(double lambda, double pitch) const {
    const double t3 = pitch * pitch * pitch + 1.0;
    if (t3 == 0.0 || lambda + a5 == 0.0) {
      throw std::domain_error("exponential Cp is singular at this point");
    }
    const double inv_li = 1.0 / (lambda + a5) - a6 / t3;
    if (!std::isfinite(inv_li)) {
      throw std::domain_error("exponential Cp is singular at this point");
    }
    return (a1 * inv_li + a2 * pitch + a3) * std::exp(a4 * inv_li);
  }
};

// Aerodynamic rotor torque, rotor side, in N m.
template <typename Cp>
[[nodiscard]] double rotor_torque(const RotorGeometry& geom, const Cp& cp,
                                  double omega_rotor, double v, double pitch) {
  if (!(omega_rotor > 0.0)) {
    throw std::domain_error("rotor speed must be positive");
  }
  const double lambda = geom.radius * omega_rotor / v;
  return wind_power(geom, v) * cp(lambda, pitch) / omega_rotor;
}

// Generator speed at which Cp peaks for the given wind and pitch.
[[nodiscard]] inline double cp_argmax_speed(const CpPolynomial& cp,
                                            const RotorGeometry& geom,
                                            double gear_ratio, double v,
                                            double pitch) {
  if (!(v > 0.0)) throw std::domain_error("wind speed must be positive");
  return cp.optimal_tip_speed_ratio(pitch) * gear_ratio * v / geom.radius;
}

}  // namespace turbine_lq
