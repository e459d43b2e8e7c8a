#pragma once

#include <array>
#include <fstream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "turbine_lq/sim.hpp"

namespace turbine_lq {

enum class ControllerKind { kBaseline, kLq };

[[nodiscard]] inline const char* to_string(ControllerKind k) {
  return k == ControllerKind::kBaseline ? "baseline" : "lq";
}

// Everything a run needs. Defaults reproduce the reference setup at 15 m/s.
struct Scenario {
  TurbineParameters turbine{};
  CpPolynomial cp = reference_cp();
  ControllerKind controller = ControllerKind::kLq;
  BaselineConfig baseline{};
  LqConfig lq{};
  WindSpec wind{};
  std::optional<std::string> wind_csv;                 // replay instead of generating
  std::vector<std::pair<double, double>> wind_ramp;    // scripted instead of generating
  std::vector<double> demand_times{0.0, 120.0, 240.0, 360.0, 480.0};
  std::vector<double> demand_fractions{0.70, 0.60, 0.75, 0.65, 0.70};
  DemandShape demand_shape = DemandShape::kStairs;
  SimOptions sim{};
  LoadSettings loads{};
};

namespace detail {

using nlohmann::json;

// Reads optional keys from one JSON object and rejects the ones nobody asked
// for, so a misspelt key cannot silently fall back to a default.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ConfigError("section '" + name_ + "' must be an object");
  }
  ~Section() = default;
  Section(const Section&) = delete;
  Section& operator=(const Section&) = delete;

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError("'" + name_ + "." + key + "' has the wrong type");
    }
  }
  [[nodiscard]] const json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }
  [[nodiscard]] const std::string& name() const { return name_; }
  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) {
        throw ConfigError("unknown key '" + name_ + "." + key + "'");
      }
    }
  }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

inline Interval read_interval(Section& s, const char* lo, const char* hi,
                              const Interval& current) {
  double a = current.lower();
  double b = current.upper();
  s.get(lo, a);
  s.get(hi, b);
  if (!(a < b)) throw ConfigError("'" + s.name() + "': " + lo + " must be below " + hi);
  return Interval(a, b);
}

inline void read_turbine(const json& j, TurbineParameters& p) {
  Section s(j, "turbine");
  s.get("inertia_kgm2", p.inertia);
  s.get("gear_ratio", p.gear_ratio);
  s.get("efficiency", p.efficiency);
  s.get("rotor_radius_m", p.rotor.radius);
  s.get("air_density", p.rotor.air_density);
  s.get("rated_speed_radps", p.rated_speed);
  s.get("rated_torque_nm", p.rated_torque);
  s.get("rated_power_w", p.rated_power);
  p.limits.pitch_deg = read_interval(s, "pitch_min_deg", "pitch_max_deg", p.limits.pitch_deg);
  double pitch_step = p.limits.pitch_step_deg.upper() / kDegPerRad;
  s.get("pitch_step_rad", pitch_step);
  if (!(pitch_step > 0.0)) throw ConfigError("'turbine.pitch_step_rad' must be positive");
  p.limits.pitch_step_deg = Interval::symmetric(pitch_step * kDegPerRad);
  p.limits.torque = read_interval(s, "torque_min_nm", "torque_max_nm", p.limits.torque);
  double torque_step = p.limits.torque_step.upper();
  s.get("torque_step_nm", torque_step);
  if (!(torque_step > 0.0)) throw ConfigError("'turbine.torque_step_nm' must be positive");
  p.limits.torque_step = Interval::symmetric(torque_step);
  s.finish();
  p.validate();
}

inline CpPolynomial read_cp(const json& j, const std::string& base_dir) {
  Section s(j, "cp");
  CpDomain domain{};
  s.get("lambda_min", domain.lambda_min);
  s.get("lambda_max", domain.lambda_max);
  s.get("pitch_min_deg", domain.pitch_min);
  s.get("pitch_max_deg", domain.pitch_max);
  std::vector<double> coeffs;
  s.get("coefficients", coeffs);
  std::string samples;
  s.get("samples_csv", samples);
  s.finish();
  if (!coeffs.empty() && !samples.empty()) {
    throw ConfigError("'cp' takes either coefficients or samples_csv, not both");
  }
  if (!samples.empty()) {
    const std::string path = samples.front() == '/' ? samples : base_dir + samples;
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open Cp samples '" + path + "'");
    const auto rows = read_cp_samples(in);
    return fit_cp_polynomial(rows, domain);
  }
  if (coeffs.empty()) {
    return CpPolynomial(CpPolynomial::reference_coefficients(), domain);
  }
  if (coeffs.size() != CpPolynomial::kTerms) {
    throw ConfigError("'cp.coefficients' needs exactly 15 entries");
  }
  std::array<double, CpPolynomial::kTerms> c{};
  std::copy(coeffs.begin(), coeffs.end(), c.begin());
  return CpPolynomial(c, domain);
}

inline void read_baseline(const json& j, BaselineConfig& c) {
  Section s(j, "baseline");
  std::string units = "reference";
  s.get("gain_units", units);
  if (units == "degrees") {
    const auto lit = BaselineConfig::literal_degrees();
    c.c_theta_gb = lit.c_theta_gb;
    c.k_p = lit.k_p;
    c.k_i = lit.k_i;
    c.k_k = lit.k_k;
  } else if (units != "reference") {
    throw ConfigError("'baseline.gain_units' must be 'reference' or 'degrees'");
  }
  s.get("c_m_star", c.c_m_star);
  s.get("c_12", c.c_12);
  s.get("omega_ci_radps", c.omega_ci);
  s.get("omega_r2_radps", c.omega_r2);
  s.get("c_theta_gb", c.c_theta_gb);
  s.get("c_m_gb", c.c_m_gb);
  s.get("t_m_s", c.t_m);
  s.get("t_theta_s", c.t_theta);
  s.get("t_gb_s", c.t_gb);
  s.get("k_p", c.k_p);
  s.get("k_i", c.k_i);
  s.get("k_k", c.k_k);
  s.get("torque_includes_efficiency", c.torque_includes_efficiency);
  std::string corr;
  s.get("pitch_correction", corr);
  if (corr == "negative") {
    c.pitch_correction = PitchCorrection::kNegativePart;
  } else if (corr == "positive") {
    c.pitch_correction = PitchCorrection::kPositivePart;
  } else if (corr == "none") {
    c.pitch_correction = PitchCorrection::kNone;
  } else if (!corr.empty()) {
    throw ConfigError("'baseline.pitch_correction' must be negative, positive or none");
  }
  s.finish();
}

inline void read_design(const json& j, const std::string& name, OperatingPoint& op,
                        LqWeights& w, DesignUnits& u) {
  Section s(j, name);
  s.get("pitch_deg", op.pitch);
  double torque_knm = 0.0;
  s.get("torque_knm", torque_knm);
  if (j.contains("torque_knm")) op.torque = torque_knm * 1000.0;
  s.get("wind_mps", op.wind);
  s.get("listed_speed_radps", op.listed_speed);
  std::vector<double> q(w.q_diag.data(), w.q_diag.data() + 4);
  std::vector<double> r(w.r_diag.data(), w.r_diag.data() + 2);
  s.get("q", q);
  s.get("r", r);
  if (q.size() != 4 || r.size() != 2) {
    throw ConfigError("'" + name + "' needs q with 4 and r with 2 diagonal entries");
  }
  w.q_diag = Vec4(q[0], q[1], q[2], q[3]);
  w.r_diag = Vec2(r[0], r[1]);
  std::string pitch_unit = u.pitch_deg == 1.0 ? "deg" : "rad";
  std::string torque_unit = u.torque_nm == 1.0 ? "nm" : "knm";
  s.get("pitch_unit", pitch_unit);
  s.get("torque_unit", torque_unit);
  if (pitch_unit == "deg") {
    u.pitch_deg = 1.0;
  } else if (pitch_unit == "rad") {
    u.pitch_deg = kDegPerRad;
  } else {
    throw ConfigError("'" + name + ".pitch_unit' must be deg or rad");
  }
  if (torque_unit == "nm") {
    u.torque_nm = 1.0;
  } else if (torque_unit == "knm") {
    u.torque_nm = 1000.0;
  } else {
    throw ConfigError("'" + name + ".torque_unit' must be nm or knm");
  }
  s.finish();
}

inline void read_lq(const json& j, LqConfig& c) {
  Section s(j, "lq");
  if (const json* low = s.child("low")) {
    read_design(*low, "lq.low", c.point_low, c.weights_low, c.units_low);
  }
  if (const json* high = s.child("high")) {
    read_design(*high, "lq.high", c.point_high, c.weights_high, c.units_high);
  }
  s.get("v_low_mps", c.v_low);
  s.get("v_high_mps", c.v_high);
  s.get("t1_s", c.refgen.speed_time_constant);
  s.get("t2_s", c.refgen.pitch_time_constant);
  std::string opt;
  s.get("optimum_pitch", opt);
  if (opt == "minimum") {
    c.refgen.optimum_pitch = OptimumPitch::kMinimum;
  } else if (opt == "current") {
    c.refgen.optimum_pitch = OptimumPitch::kCurrent;
  } else if (!opt.empty()) {
    throw ConfigError("'lq.optimum_pitch' must be minimum or current");
  }
  if (const json* t = s.child("tables")) {
    Section ts(*t, "lq.tables");
    ts.get("power_fractions", c.grid.power_fractions);
    ts.get("winds_mps", c.grid.winds);
    ts.get("power_tolerance", c.grid.power_tolerance);
    ts.finish();
  }
  s.finish();
  if (!(c.v_low < c.v_high)) throw ConfigError("'lq': v_low_mps must be below v_high_mps");
  if (!(c.refgen.speed_time_constant > 0.0 && c.refgen.pitch_time_constant > 0.0)) {
    throw ConfigError("'lq': t1_s and t2_s must be positive");
  }
}

inline void read_wind(const json& j, Scenario& sc) {
  Section s(j, "wind");
  s.get("mean_mps", sc.wind.mean);
  s.get("turbulence_intensity", sc.wind.turbulence_intensity);
  s.get("time_constant_s", sc.wind.time_constant);
  s.get("normalize", sc.wind.normalize);
  s.get("seed", sc.wind.seed);
  std::string csv_path;
  s.get("csv", csv_path);
  if (!csv_path.empty()) sc.wind_csv = csv_path;
  std::vector<std::array<double, 2>> ramp;
  s.get("ramp", ramp);
  for (const auto& [t, v] : ramp) sc.wind_ramp.emplace_back(t, v);
  s.finish();
  if (sc.wind_csv && !sc.wind_ramp.empty()) {
    throw ConfigError("'wind' takes either csv or ramp, not both");
  }
}

inline void read_demand(const json& j, Scenario& sc) {
  Section s(j, "demand");
  s.get("times_s", sc.demand_times);
  std::vector<double> watts;
  s.get("fractions", sc.demand_fractions);
  s.get("values_w", watts);
  std::string shape;
  s.get("shape", shape);
  s.finish();
  if (!watts.empty()) {
    if (j.contains("fractions")) {
      throw ConfigError("'demand' takes either fractions or values_w, not both");
    }
    sc.demand_fractions.clear();
    for (double w : watts) sc.demand_fractions.push_back(w / sc.turbine.rated_power);
  }
  if (shape == "ramps") {
    sc.demand_shape = DemandShape::kRamps;
  } else if (shape == "stairs" || shape.empty()) {
    sc.demand_shape = DemandShape::kStairs;
  } else {
    throw ConfigError("'demand.shape' must be stairs or ramps");
  }
}

inline void read_sim(const json& j, SimOptions& o) {
  Section s(j, "sim");
  s.get("ts_s", o.ts);
  s.get("duration_s", o.duration);
  s.get("trim_s", o.trim);
  s.get("speed_noise_std_radps", o.speed_noise_std);
  s.get("noise_seed", o.noise_seed);
  s.finish();
  if (!(o.ts > 0.0 && o.duration > 0.0)) {
    throw ConfigError("'sim': ts_s and duration_s must be positive");
  }
  if (!(o.speed_noise_std >= 0.0)) {
    throw ConfigError("'sim.speed_noise_std_radps' must be nonnegative");
  }
}

}  // namespace detail

// Parses a scenario. base_dir prefixes relative file names inside it.
[[nodiscard]] inline Scenario parse_scenario(const std::string& text,
                                             const std::string& base_dir = "") {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  Scenario sc;
  detail::Section root(j, "config");
  if (const auto* t = root.child("turbine")) detail::read_turbine(*t, sc.turbine);
  if (const auto* c = root.child("cp")) sc.cp = detail::read_cp(*c, base_dir);
  std::string controller;
  root.get("controller", controller);
  if (controller == "baseline") {
    sc.controller = ControllerKind::kBaseline;
  } else if (controller == "lq" || controller.empty()) {
    sc.controller = ControllerKind::kLq;
  } else {
    throw ConfigError("'controller' must be lq or baseline");
  }
  if (const auto* b = root.child("baseline")) detail::read_baseline(*b, sc.baseline);
  if (const auto* l = root.child("lq")) detail::read_lq(*l, sc.lq);
  if (const auto* w = root.child("wind")) detail::read_wind(*w, sc);
  if (const auto* d = root.child("demand")) detail::read_demand(*d, sc);
  if (const auto* s = root.child("sim")) detail::read_sim(*s, sc.sim);
  if (const auto* l = root.child("loads")) {
    detail::Section ls(*l, "loads");
    ls.get("torque_exponent", sc.loads.torque_exponent);
    ls.get("pitch_exponent", sc.loads.pitch_exponent);
    ls.finish();
  }
  root.finish();
  if (sc.wind_csv && !sc.wind_csv->empty() && sc.wind_csv->front() != '/') {
    sc.wind_csv = base_dir + *sc.wind_csv;
  }
  return sc;
}

[[nodiscard]] inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  const auto slash = path.find_last_of('/');
  return parse_scenario(text.str(),
                        slash == std::string::npos ? "" : path.substr(0, slash + 1));
}

[[nodiscard]] inline DemandSchedule make_demand(const Scenario& sc) {
  std::vector<double> watts;
  for (double f : sc.demand_fractions) watts.push_back(f * sc.turbine.rated_power);
  return DemandSchedule(sc.demand_times, watts, sc.sim.duration, sc.turbine.rated_power,
                        sc.demand_shape);
}

// Checks every component invariant without running anything.
inline void validate_scenario(const Scenario& sc) {
  sc.turbine.validate();
  if (!(sc.sim.ts > 0.0)) throw ConfigError("sampling time must be positive");
  if (!(sc.sim.trim >= 0.0 && sc.sim.trim < sc.sim.duration)) {
    throw ConfigError("trim must lie in [0, duration)");
  }
  sc.baseline.validate(sc.sim.ts);
  sc.lq.units_low.validate();
  sc.lq.units_high.validate();
  WindSpec w = sc.wind;
  w.duration = sc.sim.duration;
  w.ts = sc.sim.ts;
  w.validate();
  (void)make_alpha(sc.sim.ts, sc.lq.refgen.speed_time_constant, AlphaConvention::kPlus);
  (void)make_demand(sc);
  for (const auto& d : {sc.lq.weights_low, sc.lq.weights_high}) {
    check_weights(d.q(), d.r());
  }
  DelConfig{sc.loads.torque_exponent, 1.0}.validate();
  DelConfig{sc.loads.pitch_exponent, 1.0}.validate();
}

[[nodiscard]] inline WindSeries make_wind(const Scenario& sc) {
  if (sc.wind_csv) {
    std::ifstream in(*sc.wind_csv);
    if (!in) throw ConfigError("cannot open wind file '" + *sc.wind_csv + "'");
    return read_wind_csv(in);
  }
  if (!sc.wind_ramp.empty()) return scripted_wind(sc.wind_ramp, sc.sim.duration, sc.sim.ts);
  WindSpec w = sc.wind;
  w.duration = sc.sim.duration;
  w.ts = sc.sim.ts;
  return generate_wind(w);
}

[[nodiscard]] inline std::unique_ptr<Controller> make_controller(const Scenario& sc,
                                                                 ControllerKind kind,
                                                                 const LqBundle& bundle) {
  if (kind == ControllerKind::kBaseline) {
    return std::make_unique<BaselineAdapter>(sc.turbine, sc.baseline, sc.sim.ts);
  }
  RefGenConfig rc = sc.lq.refgen;
  rc.ts = sc.sim.ts;
  return std::make_unique<LqController>(
      LqLaw(bundle.schedule, sc.turbine.limits, sc.sim.ts),
      ReferenceGenerator(sc.turbine, sc.cp, bundle.tables, rc));
}

}  // namespace turbine_lq
