#pragma once

#include <cmath>
#include <future>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "turbine_lq/aero.hpp"
#include "turbine_lq/baseline.hpp"
#include "turbine_lq/csv.hpp"
#include "turbine_lq/dynamics.hpp"
#include "turbine_lq/loads.hpp"
#include "turbine_lq/lq.hpp"
#include "turbine_lq/refgen.hpp"
#include "turbine_lq/wind.hpp"

namespace turbine_lq {

// ---------------------------------------------------------------------------
// Controllers as seen by the harness
// ---------------------------------------------------------------------------

struct ControlOutput {
  double pitch = 0.0;
  double torque = 0.0;
  double speed_ref = 0.0;
  double pitch_ref = 0.0;
  double torque_ref = 0.0;
  int gain = 0;  // 0 when the controller has no schedule
};

class Controller {
 public:
  virtual ~Controller() = default;
  virtual void initialize(const SteadyStateCell& start) = 0;
  virtual ControlOutput step(double omega, double v, double power) = 0;
};

class BaselineAdapter final : public Controller {
 public:
  BaselineAdapter(const TurbineParameters& p, const BaselineConfig& c, double ts)
      : ctrl_(p, c, ts) {}

  void initialize(const SteadyStateCell& start) override {
    ctrl_.initialize(start.speed, start.pitch, start.torque);
  }
  ControlOutput step(double omega, double /*v*/, double power) override {
    const BaselineOutput o = ctrl_.step(omega, power);
    return {o.pitch, o.torque, o.speed_desired, o.pitch_desired, o.torque_desired, 0};
  }
  [[nodiscard]] const BaselineController& controller() const { return ctrl_; }

 private:
  BaselineController ctrl_;
};

class LqController final : public Controller {
 public:
  LqController(LqLaw law, ReferenceGenerator refgen)
      : law_(std::move(law)), refgen_(std::move(refgen)) {}

  void initialize(const SteadyStateCell& start) override {
    pitch_prev_ = start.pitch;
    law_.initialize({start.pitch, start.torque}, start.wind);
  }
  ControlOutput step(double omega, double v, double power) override {
    const ReferenceDetail ref = refgen_.step(power, v, pitch_prev_);
    const ActuatorCommand cmd = law_.step(ref.filtered, omega, v);
    pitch_prev_ = cmd.pitch;
    return {cmd.pitch,          cmd.torque,          ref.filtered.speed,
            ref.filtered.pitch, ref.filtered.torque, law_.active()};
  }
  [[nodiscard]] const LqLaw& law() const { return law_; }

 private:
  LqLaw law_;
  ReferenceGenerator refgen_;
  double pitch_prev_ = 0.0;
};

// Operating point definitions for the two designs of the schedule.
struct OperatingPoint {
  double pitch = 0.0;        // deg
  double torque = 0.0;       // N m
  double wind = 0.0;         // m/s
  double listed_speed = 0.0; // rad/s as tabulated, for reporting only
};

struct LqConfig {
  OperatingPoint point_low{2.65, 16850.0, 8.0, 119.31};
  OperatingPoint point_high{6.98, 25720.0, 10.5, 119.31};
  LqWeights weights_low{Vec4(1e-2, 1e3, 1e3, 1e-2), Vec2(5e4, 5e4)};
  LqWeights weights_high{Vec4(1e-4, 10.0, 1e4, 1e6), Vec2(1e6, 1e4)};
  // Units the weights are read in, per design. Torques are listed in kN m;
  // the low-wind design weighs pitch in degrees, the high-wind one in radians.
  DesignUnits units_low{1.0, 1000.0};
  DesignUnits units_high{kDegPerRad, 1000.0};
  double v_low = 10.0;
  double v_high = 12.0;
  RefGenConfig refgen{};
  TableGrid grid{};
};

struct LqBundle {
  GainSchedule schedule;
  SteadyStateTables tables;
  std::array<LinearPlantModel, 2> plants;
};

[[nodiscard]] inline LqBundle design_schedule(const TurbineParameters& p,
                                              const CpPolynomial& cp,
                                              const LqConfig& cfg, double ts) {
  auto one = [&](const OperatingPoint& op, const LqWeights& w, const DesignUnits& u) {
    const Equilibrium eq = find_equilibrium(p, cp, op.pitch, op.torque, op.wind);
    const LinearPlantModel lin = linearize(p, cp, eq, ts);
    return std::make_pair(lin, design_lq(lin, w.q(), w.r(), u));
  };
  auto [lin1, d1] = one(cfg.point_low, cfg.weights_low, cfg.units_low);
  auto [lin2, d2] = one(cfg.point_high, cfg.weights_high, cfg.units_high);
  return LqBundle{GainSchedule(std::move(d1), std::move(d2), cfg.v_low, cfg.v_high),
                  build_tables(p, cp, cfg.grid),
                  {lin1, lin2}};
}

// ---------------------------------------------------------------------------
// Closed loop
// ---------------------------------------------------------------------------

struct SimTrace {
  double ts = 0.004;
  std::vector<double> t, wind, demand, omega, pitch, torque, power, omega_ref,
      pitch_ref, torque_ref;
  std::vector<int> gain;

  [[nodiscard]] std::size_t size() const { return t.size(); }
  void reserve(std::size_t n) {
    for (auto* v : {&t, &wind, &demand, &omega, &pitch, &torque, &power,
                    &omega_ref, &pitch_ref, &torque_ref}) {
      v->reserve(n);
    }
    gain.reserve(n);
  }
};

struct Metrics {
  double rms_tracking_error = 0.0;  // W
  double mean_abs_error = 0.0;      // W
  double pitch_travel = 0.0;        // deg
  double torque_travel = 0.0;       // N m
  long switch_count = 0;
};

struct SwitchEvent {
  double time = 0.0;
  int from = 0;
  int to = 0;
};

struct SimOptions {
  double ts = 0.004;
  double duration = 600.0;
  double trim = 90.0;
  double speed_noise_std = 0.0;  // additive measurement noise, rad/s
  std::uint64_t noise_seed = 0;
};

struct SimResult {
  SimTrace trace;
  Metrics metrics;
  std::vector<SwitchEvent> switches;
  SteadyStateCell start;
};

[[nodiscard]] inline std::size_t first_index_at(const SimTrace& trace, double trim) {
  std::size_t i = 0;
  while (i < trace.size() && trace.t[i] < trim) ++i;
  return i;
}

[[nodiscard]] inline double rms_error(const SimTrace& trace, double trim) {
  const std::size_t first = first_index_at(trace, trim);
  if (first >= trace.size()) throw ConfigError("post-trim window is empty");
  double sum = 0.0;
  for (std::size_t i = first; i < trace.size(); ++i) {
    const double e = trace.power[i] - trace.demand[i];
    sum += e * e;
  }
  return std::sqrt(sum / static_cast<double>(trace.size() - first));
}

[[nodiscard]] inline Metrics compute_metrics(const SimTrace& trace, double trim) {
  Metrics m;
  const std::size_t first = first_index_at(trace, trim);
  if (first >= trace.size()) throw ConfigError("post-trim window is empty");
  m.rms_tracking_error = rms_error(trace, trim);
  double abs_sum = 0.0;
  for (std::size_t i = first; i < trace.size(); ++i) {
    abs_sum += std::abs(trace.power[i] - trace.demand[i]);
    if (i > first) {
      m.pitch_travel += std::abs(trace.pitch[i] - trace.pitch[i - 1]);
      m.torque_travel += std::abs(trace.torque[i] - trace.torque[i - 1]);
      if (trace.gain[i] != trace.gain[i - 1]) ++m.switch_count;
    }
  }
  m.mean_abs_error = abs_sum / static_cast<double>(trace.size() - first);
  return m;
}

[[nodiscard]] inline std::vector<SwitchEvent> switch_events(const SimTrace& trace) {
  std::vector<SwitchEvent> out;
  for (std::size_t i = 1; i < trace.size(); ++i) {
    if (trace.gain[i] != trace.gain[i - 1]) {
      out.push_back({trace.t[i], trace.gain[i - 1], trace.gain[i]});
    }
  }
  return out;
}

// Balanced operating point the runs start from. Without wind there is no
// balance; the rotor then starts at the speed setpoint.
[[nodiscard]] inline SteadyStateCell initial_state(const TurbineParameters& p,
                                                   const CpPolynomial& cp,
                                                   double v, double power) {
  if (v > 0.0) return solve_steady_state(p, cp, power, v);
  SteadyStateCell c{power, 0.0, setpoint_speed(p, cp, power),
                    p.limits.pitch_deg.lower(), 0.0, false};
  if (c.speed > 0.0) c.torque = sat(reference_torque(p, power, c.speed), p.limits.torque);
  return c;
}

// One plant step. Calm air exerts no aerodynamic torque, so the speed then
// falls linearly under the generator torque until the rotor stands still.
[[nodiscard]] inline double advance_plant(const TurbineParameters& p,
                                          const CpPolynomial& cp, double omega,
                                          double pitch, double torque, double v,
                                          double ts) {
  if (v == 0.0) {
    const double decel = p.gear_ratio * p.gear_ratio / p.inertia * torque;
    return std::clamp(omega - ts * decel, 0.0, 3.0 * p.rated_speed);
  }
  if (omega == 0.0) {
    throw DivergenceError("rotor at standstill in moving air", -1);
  }
  return integrate_step(p, cp, omega, pitch, torque, v, ts);
}

[[nodiscard]] inline SimResult run_closed_loop(const TurbineParameters& p,
                                               const CpPolynomial& cp,
                                               Controller& controller,
                                               const WindSeries& wind,
                                               const DemandSchedule& demand,
                                               const SimOptions& opt) {
  if (!(opt.trim >= 0.0 && opt.trim < opt.duration)) {
    throw ConfigError("trim must lie in [0, duration)");
  }
  if (std::abs(wind.ts - opt.ts) > 1e-12) {
    throw ConfigError("wind series sampling time differs from the controller's");
  }
  const auto n = static_cast<std::size_t>(std::llround(opt.duration / opt.ts)) + 1;
  if (wind.values.size() < n) {
    throw ConfigError("wind series is shorter than the simulation");
  }
  if (demand.duration() < opt.duration) {
    throw ConfigError("demand schedule is shorter than the simulation");
  }

  SimResult res;
  SimTrace& tr = res.trace;
  tr.ts = opt.ts;
  tr.reserve(n);
  res.start = initial_state(p, cp, wind.values[0], demand(0.0));
  controller.initialize(res.start);
  double omega = res.start.speed;

  std::mt19937_64 noise_rng(opt.noise_seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  for (std::size_t k = 0; k < n; ++k) {
    const double t = opt.ts * static_cast<double>(k);
    const double v = wind.values[k];
    const double pd = demand(std::min(t, demand.duration()));
    double measured = omega;
    if (opt.speed_noise_std > 0.0) measured += opt.speed_noise_std * noise(noise_rng);
    const ControlOutput u = controller.step(measured, v, pd);
    tr.t.push_back(t);
    tr.wind.push_back(v);
    tr.demand.push_back(pd);
    tr.omega.push_back(omega);
    tr.pitch.push_back(u.pitch);
    tr.torque.push_back(u.torque);
    tr.power.push_back(electrical_power(p, omega, u.torque));
    tr.omega_ref.push_back(u.speed_ref);
    tr.pitch_ref.push_back(u.pitch_ref);
    tr.torque_ref.push_back(u.torque_ref);
    tr.gain.push_back(u.gain);
    if (k + 1 < n) {
      try {
        omega = advance_plant(p, cp, omega, u.pitch, u.torque, v, opt.ts);
      } catch (const DivergenceError& e) {
        std::ostringstream msg;
        msg << "plant diverged at step " << k << " (t = " << t << " s): " << e.what();
        throw DivergenceError(msg.str(), static_cast<long>(k));
      }
    }
  }
  res.metrics = compute_metrics(tr, opt.trim);
  res.switches = switch_events(tr);
  return res;
}

// ---------------------------------------------------------------------------
// Trace CSV
// ---------------------------------------------------------------------------

inline constexpr const char* kTraceHeader =
    "t_s,wind_mps,p_demand_w,omega_radps,pitch_deg,torque_nm,p_e_w,"
    "omega_ref_radps,pitch_ref_deg,torque_ref_nm,gain_idx";

[[nodiscard]] inline std::string trace_csv(const SimTrace& tr) {
  std::string text = kTraceHeader;
  text += '\n';
  text.reserve(tr.size() * 200);
  for (std::size_t i = 0; i < tr.size(); ++i) {
    for (double v : {tr.t[i], tr.wind[i], tr.demand[i], tr.omega[i], tr.pitch[i],
                     tr.torque[i], tr.power[i], tr.omega_ref[i], tr.pitch_ref[i],
                     tr.torque_ref[i]}) {
      csv::append(text, v);
      text += ',';
    }
    csv::append(text, static_cast<long long>(tr.gain[i]));
    text += '\n';
  }
  return text;
}

[[nodiscard]] inline SimTrace parse_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) {
    throw ConfigError("trace file does not start with the trace header");
  }
  SimTrace tr;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto cells = csv::split(line);
    if (cells.size() != 11) {
      throw ConfigError("trace row " + std::to_string(row) + " does not have 11 fields");
    }
    std::vector<double>* cols[] = {&tr.t,     &tr.wind,   &tr.demand,    &tr.omega,
                                   &tr.pitch, &tr.torque, &tr.power,     &tr.omega_ref,
                                   &tr.pitch_ref, &tr.torque_ref};
    for (std::size_t c = 0; c < 10; ++c) cols[c]->push_back(csv::parse_double(cells[c]));
    tr.gain.push_back(static_cast<int>(csv::parse_double(cells[10])));
  }
  if (tr.size() >= 2) tr.ts = tr.t[1] - tr.t[0];
  return tr;
}

// ---------------------------------------------------------------------------
// Loads and comparison
// ---------------------------------------------------------------------------

struct LoadProxies {
  double torque_del = 0.0;  // N m, generator torque
  double pitch_del = 0.0;   // deg
  double shaft_del = 0.0;   // N m, aerodynamic rotor torque
};

struct LoadSettings {
  double torque_exponent = 4.0;
  double pitch_exponent = 10.0;
};

[[nodiscard]] inline LoadProxies load_proxies(const TurbineParameters& p,
                                              const CpPolynomial& cp,
                                              const SimTrace& tr, double trim,
                                              const LoadSettings& s = {}) {
  const std::size_t first = first_index_at(tr, trim);
  if (first >= tr.size()) throw ConfigError("post-trim window is empty");
  const double seconds = tr.ts * static_cast<double>(tr.size() - first);
  const double n_ref = std::max(seconds, 1.0);
  std::vector<double> shaft;
  shaft.reserve(tr.size() - first);
  for (std::size_t i = first; i < tr.size(); ++i) {
    shaft.push_back(rotor_torque(p.rotor, cp, tr.omega[i] / p.gear_ratio, tr.wind[i],
                                 tr.pitch[i]));
  }
  auto tail = [&](const std::vector<double>& v) {
    return std::span<const double>(v).subspan(first);
  };
  LoadProxies out;
  out.torque_del = damage_equivalent_load(rainflow(tail(tr.torque)),
                                          {s.torque_exponent, n_ref});
  out.pitch_del = damage_equivalent_load(rainflow(tail(tr.pitch)),
                                         {s.pitch_exponent, n_ref});
  out.shaft_del = damage_equivalent_load(rainflow(shaft), {s.torque_exponent, n_ref});
  return out;
}

struct Comparison {
  SimResult baseline;
  SimResult lq;
  LoadProxies baseline_loads;
  LoadProxies lq_loads;
};

// Runs both controllers on the same inputs, concurrently.
[[nodiscard]] inline Comparison compare_controllers(
    const TurbineParameters& p, const CpPolynomial& cp,
    std::unique_ptr<Controller> baseline, std::unique_ptr<Controller> lq,
    const WindSeries& wind, const DemandSchedule& demand, const SimOptions& opt,
    const LoadSettings& loads = {}) {
  auto run = [&](Controller* c) {
    return run_closed_loop(p, cp, *c, wind, demand, opt);
  };
  auto fut = std::async(std::launch::async, run, lq.get());
  Comparison out;
  out.baseline = run(baseline.get());
  out.lq = fut.get();
  out.baseline_loads = load_proxies(p, cp, out.baseline.trace, opt.trim, loads);
  out.lq_loads = load_proxies(p, cp, out.lq.trace, opt.trim, loads);
  return out;
}

}  // namespace turbine_lq
