#pragma once

#include <cmath>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "turbine_lq/aero.hpp"
#include "turbine_lq/common.hpp"
#include "turbine_lq/csv.hpp"
#include "turbine_lq/dynamics.hpp"
#include "turbine_lq/lq.hpp"

namespace turbine_lq {

struct TableGrid {
  std::vector<double> power_fractions{0.1, 0.2, 0.3, 0.4, 0.5,
                                      0.6, 0.7, 0.8, 0.9, 1.0};
  std::vector<double> winds{3,  4,  5,  6,  7,  8,  9,  10, 11, 12, 13, 14,
                            15, 16, 17, 18, 19, 20, 21, 22, 23, 24, 25};
  double power_tolerance = 1e-6;  // relative
};

struct SteadyStateCell {
  double power = 0.0;  // W, demanded
  double wind = 0.0;   // m/s
  double speed = 0.0;  // rad/s
  double pitch = 0.0;  // deg
  double torque = 0.0; // N m
  bool feasible = false;
};

struct SteadyStateTables {
  Table1D speed;  // demanded power -> speed setpoint
  Table2D pitch;  // (demanded power, wind) -> pitch
  Table2D torque; // (demanded power, wind) -> torque
  std::vector<bool> feasible;
  double power_tolerance = 1e-6;
};

namespace detail {

// Aerodynamic power minus the share needed for the electrical target, at a
// fixed generator speed.
inline double power_surplus(const TurbineParameters& p, const CpPolynomial& cp,
                            double omega, double v, double pitch,
                            double target_aero) {
  const double lambda = tip_speed_ratio(p.rotor, omega, p.gear_ratio, v);
  return wind_power(p.rotor, v) * cp(lambda, pitch) - target_aero;
}

}  // namespace detail

// Speed on the maximum power curve at pitch_min that delivers the demanded
// electrical power, capped at rated speed.
[[nodiscard]] inline double setpoint_speed(const TurbineParameters& p,
                                           const CpPolynomial& cp,
                                           double power) {
  if (!(power >= 0.0)) throw ConfigError("demanded power must be nonnegative");
  const double pitch = p.limits.pitch_deg.lower();
  const double lambda = cp.optimal_tip_speed_ratio(pitch);
  const double cp_max = cp(lambda, pitch);
  const double r = p.rotor.radius;
  const double n = p.gear_ratio;
  const double k_opt = 0.5 * p.rotor.air_density * kPi * std::pow(r, 5) *
                       cp_max / (std::pow(lambda, 3) * std::pow(n, 3));
  return std::min(std::cbrt(power / (p.efficiency * k_opt)), p.rated_speed);
}

// Steady operating point for one (power, wind) cell: generator speed at the
// setpoint, smallest pitch whose aerodynamic power matches P / eta, torque
// from the power balance. Only tip-speed ratios inside the Cp domain count.
// Cells the wind cannot serve hold the maximum-power point at minimum pitch;
// cells with more wind than maximum pitch can shed hold maximum pitch.
[[nodiscard]] inline SteadyStateCell solve_steady_state(
    const TurbineParameters& p, const CpPolynomial& cp, double power, double v,
    double power_tolerance = 1e-6) {
  SteadyStateCell cell{power, v, 0.0, 0.0, 0.0, false};
  const double omega = setpoint_speed(p, cp, power);
  const double lo = p.limits.pitch_deg.lower();
  const double hi = p.limits.pitch_deg.upper();
  const double target = power / p.efficiency;
  auto surplus = [&](double pitch) {
    return detail::power_surplus(p, cp, omega, v, pitch, target);
  };
  const double lambda = omega > 0.0 ? tip_speed_ratio(p.rotor, omega, p.gear_ratio, v) : 0.0;
  const bool in_domain =
      lambda >= cp.domain().lambda_min && lambda <= cp.domain().lambda_max;
  std::optional<std::pair<double, double>> bracket;
  if (power > 0.0 && in_domain) {
    constexpr int kScan = 2000;
    const double h = (hi - lo) / kScan;
    double prev = surplus(lo);
    if (prev == 0.0) bracket = std::make_pair(lo, lo);
    for (int i = 1; i <= kScan && !bracket; ++i) {
      const double t = lo + i * h;
      const double s = surplus(t);
      if ((prev < 0.0) != (s < 0.0)) bracket = std::make_pair(t - h, t);
      prev = s;
    }
  }
  if (bracket) {
    auto [a, b] = *bracket;
    const double sign_a = surplus(a) < 0.0 ? -1.0 : 1.0;
    while (b - a > 1e-12 * std::max(1.0, std::abs(b))) {
      const double m = 0.5 * (a + b);
      if ((surplus(m) < 0.0 ? -1.0 : 1.0) == sign_a) {
        a = m;
      } else {
        b = m;
      }
    }
    const double pitch = 0.5 * (a + b);
    if (std::abs(surplus(pitch)) <= power_tolerance * target) {
      cell.speed = omega;
      cell.pitch = pitch;
      cell.torque = power / (p.efficiency * omega);
      cell.feasible = p.limits.torque.contains(cell.torque);
      if (cell.feasible) return cell;
    }
  }
  if (power > 0.0 && in_domain && surplus(hi) > 0.0) {
    cell.speed = omega;
    cell.pitch = hi;
    cell.torque = sat(power / (p.efficiency * omega), p.limits.torque);
    return cell;
  }
  const double best = std::min(cp_argmax_speed(cp, p.rotor, p.gear_ratio, v, lo),
                               p.rated_speed);
  const double best_lambda = tip_speed_ratio(p.rotor, best, p.gear_ratio, v);
  const double aero = wind_power(p.rotor, v) * cp(best_lambda, lo);
  cell.speed = best;
  cell.pitch = lo;
  cell.torque = sat(aero / best, p.limits.torque);
  return cell;
}

[[nodiscard]] inline SteadyStateTables build_tables(const TurbineParameters& p,
                                                    const CpPolynomial& cp,
                                                    const TableGrid& grid = {}) {
  std::vector<double> powers;
  powers.reserve(grid.power_fractions.size());
  for (double f : grid.power_fractions) {
    if (!(f >= 0.0 && f <= 1.0)) {
      throw ConfigError("table power fractions must lie in [0, 1]");
    }
    powers.push_back(f * p.rated_power);
  }
  std::vector<double> speeds;
  std::vector<double> pitch;
  std::vector<double> torque;
  std::vector<bool> feasible;
  for (double pw : powers) {
    speeds.push_back(setpoint_speed(p, cp, pw));
    for (double v : grid.winds) {
      const SteadyStateCell c = solve_steady_state(p, cp, pw, v, grid.power_tolerance);
      pitch.push_back(c.pitch);
      torque.push_back(c.torque);
      feasible.push_back(c.feasible);
    }
  }
  return SteadyStateTables{Table1D(powers, speeds),
                           Table2D(powers, grid.winds, pitch),
                           Table2D(powers, grid.winds, std::move(torque)),
                           std::move(feasible), grid.power_tolerance};
}

inline constexpr const char* kTablesHeader =
    "power_w,wind_mps,omega_sp,pitch_deg,torque_nm";

inline void write_tables_csv(std::ostream& out, const SteadyStateTables& t) {
  std::string text = kTablesHeader;
  text += '\n';
  const auto& px = t.pitch.x();
  const auto& vy = t.pitch.y();
  for (std::size_t i = 0; i < px.size(); ++i) {
    for (std::size_t j = 0; j < vy.size(); ++j) {
      for (double v : {px[i], vy[j], t.speed.y()[i], t.pitch.at(i, j),
                       t.torque.at(i, j)}) {
        csv::append(text, v);
        text += ',';
      }
      text.back() = '\n';
    }
  }
  out << text;
}

// Inverse of write_tables_csv. Feasibility is not stored in the file and is
// reported as unknown (all false).
[[nodiscard]] inline SteadyStateTables read_tables_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTablesHeader) {
    throw ConfigError(std::string("tables file must start with '") +
                      kTablesHeader + "'");
  }
  std::vector<double> powers;
  std::vector<double> winds;
  std::vector<double> speeds;
  std::vector<double> pitch;
  std::vector<double> torque;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto cells = csv::split(line);
    if (cells.size() != 5) {
      throw ConfigError("tables file row " + std::to_string(row) +
                        " does not have 5 fields");
    }
    double f[5];
    for (std::size_t k = 0; k < 5; ++k) f[k] = csv::parse_double(cells[k]);
    if (powers.empty() || powers.back() != f[0]) {
      powers.push_back(f[0]);
      speeds.push_back(f[2]);
    }
    if (powers.size() == 1) winds.push_back(f[1]);
    pitch.push_back(f[3]);
    torque.push_back(f[4]);
  }
  if (powers.empty() || pitch.size() != powers.size() * winds.size()) {
    throw ConfigError("tables file does not describe a full rectangular grid");
  }
  std::vector<bool> feasible(pitch.size(), false);
  return SteadyStateTables{Table1D(powers, speeds), Table2D(powers, winds, pitch),
                           Table2D(powers, winds, std::move(torque)),
                           std::move(feasible), 1e-6};
}

[[nodiscard]] inline double reference_torque(const TurbineParameters& p,
                                             double power, double omega_ref) {
  if (!(omega_ref > 0.0)) {
    throw std::domain_error("reference speed must be positive");
  }
  return power / (p.efficiency * omega_ref);
}

// Which pitch the Cp maximization for the speed reference is evaluated at.
enum class OptimumPitch {
  kCurrent,  // the pitch applied at the previous step
  kMinimum,  // the lower pitch bound
};

struct RefGenConfig {
  double ts = 0.004;
  double speed_time_constant = 20.0;  // T_1
  double pitch_time_constant = 40.0;  // T_2
  OptimumPitch optimum_pitch = OptimumPitch::kMinimum;
};

struct ReferenceDetail {
  ReferenceSample filtered;
  double optimal_speed = 0.0;   // omega*
  double setpoint_speed = 0.0;  // omega^sp
  double raw_pitch = 0.0;       // LUT output before filtering
};

class ReferenceGenerator {
 public:
  ReferenceGenerator(const TurbineParameters& p, const CpPolynomial& cp,
                     SteadyStateTables tables, const RefGenConfig& cfg)
      : p_(p),
        cp_(cp),
        tables_(std::move(tables)),
        cfg_(cfg),
        speed_filter_(make_alpha(cfg.ts, cfg.speed_time_constant,
                                 AlphaConvention::kPlus)),
        pitch_filter_(make_alpha(cfg.ts, cfg.pitch_time_constant,
                                 AlphaConvention::kPlus)) {}

  ReferenceDetail step(double power, double v, double pitch_now) {
    if (!(v >= 0.0)) throw std::domain_error("wind speed must be nonnegative");
    ReferenceDetail d;
    const double pitch_for_optimum =
        cfg_.optimum_pitch == OptimumPitch::kCurrent
            ? std::clamp(pitch_now, cp_.domain().pitch_min, cp_.domain().pitch_max)
            : p_.limits.pitch_deg.lower();
    d.optimal_speed = v > 0.0 ? cp_argmax_speed(cp_, p_.rotor, p_.gear_ratio, v,
                                                pitch_for_optimum)
                              : 0.0;
    d.setpoint_speed = tables_.speed(power);
    const double speed_raw = std::min(d.optimal_speed, d.setpoint_speed);
    d.raw_pitch = sat(tables_.pitch(power, v), p_.limits.pitch_deg);
    d.filtered.speed = speed_filter_.step(speed_raw);
    d.filtered.pitch = pitch_filter_.step(d.raw_pitch);
    // A stopped reference cannot deliver power; ask for full torque then.
    const double torque_raw = d.filtered.speed > 0.0
                                  ? reference_torque(p_, power, d.filtered.speed)
                                  : (power > 0.0 ? p_.limits.torque.upper() : 0.0);
    d.filtered.torque = sat(torque_raw, p_.limits.torque);
    return d;
  }

  [[nodiscard]] const SteadyStateTables& tables() const { return tables_; }
  [[nodiscard]] const RefGenConfig& config() const { return cfg_; }

 private:
  TurbineParameters p_;
  CpPolynomial cp_;
  SteadyStateTables tables_;
  RefGenConfig cfg_;
  LowpassFilter speed_filter_;
  LowpassFilter pitch_filter_;
};

}  // namespace turbine_lq
