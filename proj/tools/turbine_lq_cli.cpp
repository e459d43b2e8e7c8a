// turbine-lq: run, compare, design, tables.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "svg.hpp"
#include "turbine_lq/config.hpp"

namespace fs = std::filesystem;
using namespace turbine_lq;

namespace {

enum Exit { kOk = 0, kFailure = 1, kInvalid = 2, kDiverged = 3, kDesign = 4 };

// Output files are collected in memory and only written once everything has
// succeeded, so a failing run leaves the output directory untouched.
class Outputs {
 public:
  void add(std::string name, std::string content) {
    files_.emplace_back(std::move(name), std::move(content));
  }
  void commit(const fs::path& dir) const {
    fs::create_directories(dir);
    std::vector<fs::path> staged;
    try {
      for (const auto& [name, content] : files_) {
        const fs::path tmp = dir / (name + ".partial");
        std::ofstream out(tmp, std::ios::binary);
        out << content;
        out.close();
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        staged.push_back(tmp);
      }
    } catch (...) {
      for (const auto& p : staged) fs::remove(p);
      throw;
    }
    for (std::size_t i = 0; i < files_.size(); ++i) {
      fs::rename(staged[i], dir / files_[i].first);
      spdlog::info("wrote {}", (dir / files_[i].first).string());
    }
  }

 private:
  std::vector<std::pair<std::string, std::string>> files_;
};

struct Flags {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<double> trim;
};

Scenario scenario_from(const Flags& f) {
  Scenario sc = f.config.empty() ? Scenario{} : load_scenario(f.config);
  if (f.seed) sc.wind.seed = *f.seed;
  if (f.trim) sc.sim.trim = *f.trim;
  validate_scenario(sc);
  return sc;
}

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("turbine-lq");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  const char* env = std::getenv("TURBINE_LQ_LOG");
  spdlog::set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
}

std::string fmt_double(double x) {
  std::string s;
  csv::append(s, x);
  return s;
}

nlohmann::json metrics_json(const SimResult& r, const LoadProxies& loads) {
  nlohmann::json j;
  j["rms_tracking_error_w"] = r.metrics.rms_tracking_error;
  j["mean_abs_error_w"] = r.metrics.mean_abs_error;
  j["pitch_travel_deg"] = r.metrics.pitch_travel;
  j["torque_travel_nm"] = r.metrics.torque_travel;
  j["switch_count"] = r.metrics.switch_count;
  j["del_torque_nm"] = loads.torque_del;
  j["del_pitch_deg"] = loads.pitch_del;
  j["del_shaft_nm"] = loads.shaft_del;
  nlohmann::json sw = nlohmann::json::array();
  for (const auto& e : r.switches) sw.push_back({{"t_s", e.time}, {"from", e.from}, {"to", e.to}});
  j["switch_events"] = sw;
  return j;
}

std::vector<std::pair<std::pair<double, double>, std::string>> gain_spans(const SimTrace& tr) {
  std::vector<std::pair<std::pair<double, double>, std::string>> spans;
  if (tr.size() == 0) return spans;
  std::size_t start = 0;
  for (std::size_t i = 1; i <= tr.size(); ++i) {
    if (i == tr.size() || tr.gain[i] != tr.gain[start]) {
      const double t_end = i == tr.size() ? tr.t.back() : tr.t[i];
      if (tr.gain[start] != 0) {
        spans.push_back({{tr.t[start], t_end}, tr.gain[start] == 1 ? "#eeeeee" : "#cccccc"});
      }
      start = i;
    }
  }
  return spans;
}

void add_run_plots(Outputs& out, const SimTrace& tr, const std::string& who) {
  std::vector<double> kw(tr.size()), dkw(tr.size()), tq(tr.size()), tqr(tr.size());
  for (std::size_t i = 0; i < tr.size(); ++i) {
    kw[i] = tr.power[i] / 1e3;
    dkw[i] = tr.demand[i] / 1e3;
    tq[i] = tr.torque[i] / 1e3;
    tqr[i] = tr.torque_ref[i] / 1e3;
  }
  out.add("power.svg",
          svg::render("Output power (" + who + ")", tr.t,
                      {{"power [kW]", {{"P_e", &kw, "#1f77b4"}, {"demand", &dkw, "#d62728", true}}}}));
  out.add("references.svg",
          svg::render("Reference tracking (" + who + ")", tr.t,
                      {{"speed [rad/s]", {{"omega", &tr.omega}, {"ref", &tr.omega_ref, "#d62728", true}}},
                       {"torque [kN m]", {{"M_g", &tq}, {"ref", &tqr, "#d62728", true}}},
                       {"pitch [deg]", {{"theta", &tr.pitch}, {"ref", &tr.pitch_ref, "#d62728", true}}}}));
  const auto spans = gain_spans(tr);
  out.add("switching.svg",
          svg::render("Gain switching (" + who + ")", tr.t,
                      {{"wind [m/s]", {{"V", &tr.wind}}, spans},
                       {"speed [rad/s]", {{"omega", &tr.omega}, {"ref", &tr.omega_ref, "#d62728", true}}, spans},
                       {"power [kW]", {{"P_e", &kw}, {"demand", &dkw, "#d62728", true}}, spans},
                       {"torque [kN m]", {{"M_g", &tq}, {"ref", &tqr, "#d62728", true}}, spans},
                       {"pitch [deg]", {{"theta", &tr.pitch}, {"ref", &tr.pitch_ref, "#d62728", true}}, spans}}));
}

int cmd_run(const Flags& f) {
  const Scenario sc = scenario_from(f);
  const WindSeries wind = make_wind(sc);
  if (wind.clipped > 0) spdlog::warn("{} wind samples clipped to the guard band", wind.clipped);
  const DemandSchedule demand = make_demand(sc);
  spdlog::info("designing LQ schedule");
  const LqBundle bundle = design_schedule(sc.turbine, sc.cp, sc.lq, sc.sim.ts);
  auto ctrl = make_controller(sc, sc.controller, bundle);
  spdlog::info("running {} for {} s", to_string(sc.controller), sc.sim.duration);
  const SimResult res = run_closed_loop(sc.turbine, sc.cp, *ctrl, wind, demand, sc.sim);
  const LoadProxies loads = load_proxies(sc.turbine, sc.cp, res.trace, sc.sim.trim, sc.loads);

  nlohmann::json summary;
  summary["controller"] = to_string(sc.controller);
  summary["seed"] = sc.wind.seed;
  summary["trim_s"] = sc.sim.trim;
  summary["wind_clipped_samples"] = wind.clipped;
  summary["metrics"] = metrics_json(res, loads);

  Outputs out;
  out.add("trace.csv", trace_csv(res.trace));
  out.add("metrics.json", summary.dump(2) + "\n");
  add_run_plots(out, res.trace, to_string(sc.controller));
  out.commit(f.out);
  std::cout << "rms tracking error " << res.metrics.rms_tracking_error / 1e3 << " kW, "
            << res.metrics.switch_count << " gain switches\n";
  return kOk;
}

std::string metrics_row(const std::string& name, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "| %-26s | %14.4g | %14.4g |\n", name.c_str(), a, b);
  return buf;
}

int cmd_compare(const Flags& f) {
  const Scenario sc = scenario_from(f);
  const WindSeries wind = make_wind(sc);
  const DemandSchedule variable = make_demand(sc);
  const DemandSchedule nominal =
      DemandSchedule::constant(sc.turbine.rated_power, sc.sim.duration, sc.turbine.rated_power);
  const LqBundle bundle = design_schedule(sc.turbine, sc.cp, sc.lq, sc.sim.ts);

  auto both = [&](const DemandSchedule& d) {
    return compare_controllers(sc.turbine, sc.cp, make_controller(sc, ControllerKind::kBaseline, bundle),
                               make_controller(sc, ControllerKind::kLq, bundle), wind, d, sc.sim,
                               sc.loads);
  };
  spdlog::info("running both controllers on both demand scenarios");
  auto nominal_future = std::async(std::launch::async, both, std::cref(nominal));
  const Comparison var = both(variable);
  const Comparison nom = nominal_future.get();

  std::string report = "# Controller comparison\n\n";
  report += "Wind: mean " + fmt_double(sc.wind.mean) + " m/s, TI " +
            fmt_double(sc.wind.turbulence_intensity) + ", seed " + std::to_string(sc.wind.seed) +
            ", " + std::to_string(wind.clipped) + " samples clipped. Trim " +
            fmt_double(sc.sim.trim) + " s.\n\n";
  for (const auto& [title, c] : {std::pair<std::string, const Comparison*>{"Variable demand", &var},
                                 {"Nominal demand (rated power)", &nom}}) {
    report += "## " + title + "\n\n";
    report += "| metric                     |       baseline |             lq |\n";
    report += "|----------------------------|----------------|----------------|\n";
    const auto& b = c->baseline.metrics;
    const auto& l = c->lq.metrics;
    report += metrics_row("rms tracking error [W]", b.rms_tracking_error, l.rms_tracking_error);
    report += metrics_row("mean abs error [W]", b.mean_abs_error, l.mean_abs_error);
    report += metrics_row("pitch travel [deg]", b.pitch_travel, l.pitch_travel);
    report += metrics_row("torque travel [N m]", b.torque_travel, l.torque_travel);
    report += metrics_row("switch count", double(b.switch_count), double(l.switch_count));
    report += metrics_row("DEL torque [N m]", c->baseline_loads.torque_del, c->lq_loads.torque_del);
    report += metrics_row("DEL pitch [deg]", c->baseline_loads.pitch_del, c->lq_loads.pitch_del);
    report += metrics_row("DEL shaft torque [N m]", c->baseline_loads.shaft_del, c->lq_loads.shaft_del);
    report += "\nLQ switch events:";
    if (c->lq.switches.empty()) report += " none";
    report += "\n";
    for (const auto& e : c->lq.switches) {
      report += "- t = " + fmt_double(e.time) + " s: K" + std::to_string(e.from) + " -> K" +
                std::to_string(e.to) + "\n";
    }
    report += "\n";
  }

  nlohmann::json summary;
  summary["seed"] = sc.wind.seed;
  summary["variable"] = {{"baseline", metrics_json(var.baseline, var.baseline_loads)},
                         {"lq", metrics_json(var.lq, var.lq_loads)}};
  summary["nominal"] = {{"baseline", metrics_json(nom.baseline, nom.baseline_loads)},
                        {"lq", metrics_json(nom.lq, nom.lq_loads)}};

  Outputs out;
  out.add("report.md", report);
  out.add("metrics.json", summary.dump(2) + "\n");
  out.add("trace_baseline.csv", trace_csv(var.baseline.trace));
  out.add("trace_lq.csv", trace_csv(var.lq.trace));
  out.add("trace_nominal_baseline.csv", trace_csv(nom.baseline.trace));
  out.add("trace_nominal_lq.csv", trace_csv(nom.lq.trace));
  const std::size_t first = first_index_at(var.lq.trace, sc.sim.trim);
  for (const auto* r : {&var.baseline, &var.lq}) {
    const std::string who = r == &var.baseline ? "baseline" : "lq";
    out.add("cycles_" + who + "_torque.csv",
            cycles_csv(rainflow(std::span<const double>(r->trace.torque).subspan(first))));
    out.add("cycles_" + who + "_pitch.csv",
            cycles_csv(rainflow(std::span<const double>(r->trace.pitch).subspan(first))));
  }
  const SimTrace& bt = var.baseline.trace;
  const SimTrace& lt = var.lq.trace;
  std::vector<double> bkw(bt.size()), lkw(lt.size()), dkw(bt.size()), btq(bt.size()), ltq(lt.size());
  for (std::size_t i = 0; i < bt.size(); ++i) {
    bkw[i] = bt.power[i] / 1e3;
    lkw[i] = lt.power[i] / 1e3;
    dkw[i] = bt.demand[i] / 1e3;
    btq[i] = bt.torque[i] / 1e3;
    ltq[i] = lt.torque[i] / 1e3;
  }
  out.add("compare_power.svg",
          svg::render("Output power", bt.t,
                      {{"power [kW]",
                        {{"baseline", &bkw, "#2ca02c"}, {"lq", &lkw, "#1f77b4"},
                         {"demand", &dkw, "#d62728", true}}}}));
  out.add("compare_actuators.svg",
          svg::render("Actuators and speed", bt.t,
                      {{"speed [rad/s]", {{"baseline", &bt.omega, "#2ca02c"}, {"lq", &lt.omega, "#1f77b4"}}},
                       {"torque [kN m]", {{"baseline", &btq, "#2ca02c"}, {"lq", &ltq, "#1f77b4"}}},
                       {"pitch [deg]", {{"baseline", &bt.pitch, "#2ca02c"}, {"lq", &lt.pitch, "#1f77b4"}}}}));
  out.commit(f.out);
  std::cout << report;
  return kOk;
}

std::string design_report(const Scenario& sc, const LqBundle& b) {
  std::ostringstream r;
  r.precision(10);
  for (int i = 1; i <= 2; ++i) {
    const LqDesign& d = b.schedule.design(i);
    const LinearPlantModel& lin = b.plants[static_cast<std::size_t>(i - 1)];
    const OperatingPoint& op = i == 1 ? sc.lq.point_low : sc.lq.point_high;
    const Equilibrium& eq = d.anchor();
    r << "== design " << i << " (" << (i == 1 ? "below " : "above ")
      << (i == 1 ? sc.lq.v_low : sc.lq.v_high) << " m/s)\n";
    r << "operating point: pitch " << op.pitch << " deg, torque " << op.torque << " N m, wind "
      << op.wind << " m/s\n";
    r << "equilibrium speed " << eq.speed << " rad/s (listed " << op.listed_speed
      << ", relative difference " << (eq.speed - op.listed_speed) / op.listed_speed << ")\n";
    r << "equilibrium residual " << plant_rhs(sc.turbine, sc.cp, eq.speed, eq.pitch, eq.torque, eq.wind)
      << " rad/s^2\n";
    r << "A_c " << lin.a_c << "  B_c [" << lin.b_c_pitch << ", " << lin.b_c_torque << "]  F_c "
      << lin.f_c << "\n";
    r << "A_d " << lin.a_d << "  B_d [" << lin.b_d_pitch << ", " << lin.b_d_torque << "]  F_d "
      << lin.f_d << "\n";
    const bool exact = lin.a_d == 1.0 + lin.ts * lin.a_c && lin.b_d_pitch == lin.ts * lin.b_c_pitch &&
                       lin.b_d_torque == lin.ts * lin.b_c_torque && lin.f_d == lin.ts * lin.f_c;
    r << "A_d = 1 + T_s A_c, B_d = T_s B_c, F_d = T_s F_c: " << (exact ? "exact" : "VIOLATED") << "\n";
    r << "weight units: pitch x" << d.model.units.pitch_deg << " deg, torque x"
      << d.model.units.torque_nm << " N m\n";
    r << "Q diag " << d.q.diagonal().transpose() << "\nR diag " << d.r.diagonal().transpose() << "\n";
    const double scale = 1.0 + d.s.norm();
    r << "Riccati iterations " << d.iterations << ", residual " << d.residual << " (scaled "
      << d.residual / scale << ")\n";
    Eigen::SelfAdjointEigenSolver<Mat4> es(0.5 * (d.s + d.s.transpose()));
    r << "S symmetric error " << (d.s - d.s.transpose()).norm() << ", min eigenvalue "
      << es.eigenvalues().minCoeff() << "\n";
    r << "K (design units)\n" << d.k << "\nK (deg, N m)\n" << d.k_plant << "\n";
    Eigen::EigenSolver<Mat4> cl(d.model.a - d.model.b * d.k);
    r << "closed-loop eigenvalues:";
    for (int k = 0; k < 4; ++k) r << " " << cl.eigenvalues()(k);
    r << "\nspectral radius " << d.spectral_radius << "\n\n";
  }
  return r.str();
}

int cmd_design(const Flags& f) {
  const Scenario sc = scenario_from(f);
  const LqBundle b = design_schedule(sc.turbine, sc.cp, sc.lq, sc.sim.ts);
  const std::string report = design_report(sc, b);
  Outputs out;
  out.add("design_report.txt", report);
  out.commit(f.out);
  std::cout << report;
  return kOk;
}

int cmd_tables(const Flags& f) {
  const Scenario sc = scenario_from(f);
  const SteadyStateTables t = build_tables(sc.turbine, sc.cp, sc.lq.grid);
  std::ostringstream text;
  write_tables_csv(text, t);
  std::size_t infeasible = 0;
  for (bool ok : t.feasible) infeasible += ok ? 0 : 1;
  Outputs out;
  out.add("tables.csv", text.str());
  out.commit(f.out);
  std::cout << t.feasible.size() << " cells, " << infeasible
            << " held at maximum power because the wind cannot meet the demand\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"Power-tracking wind turbine controllers: simulate, compare, design"};
  app.require_subcommand(1);
  Flags flags;
  std::uint64_t seed = 0;
  double trim = 0.0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "scenario file (JSON); defaults when omitted")
        ->check(CLI::ExistingFile);
    sub->add_option("--out", flags.out, "output directory")->capture_default_str();
    sub->add_option("--seed", seed, "wind seed, overrides the config");
    sub->add_option("--trim", trim, "seconds dropped before metrics, overrides the config");
  };
  auto* run = app.add_subcommand("run", "simulate the configured controller");
  auto* compare = app.add_subcommand("compare", "simulate both controllers on the same inputs");
  auto* design = app.add_subcommand("design", "LQ design report for both operating points");
  auto* tables = app.add_subcommand("tables", "export the steady-state lookup tables");
  for (auto* s : {run, compare, design, tables}) add_common(s);
  CLI11_PARSE(app, argc, argv);

  for (auto* s : {run, compare, design, tables}) {
    if (!s->parsed()) continue;
    if (s->count("--seed")) flags.seed = seed;
    if (s->count("--trim")) flags.trim = trim;
  }
  try {
    if (run->parsed()) return cmd_run(flags);
    if (compare->parsed()) return cmd_compare(flags);
    if (design->parsed()) return cmd_design(flags);
    return cmd_tables(flags);
  } catch (const ConfigError& e) {
    spdlog::error("invalid configuration: {}", e.what());
    std::cerr << "error: invalid configuration: " << e.what() << "\n";
    return kInvalid;
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDiverged;
  } catch (const DareError& e) {
    std::cerr << "error: LQ design failed: " << e.what() << "\n";
    return kDesign;
  } catch (const NoEquilibriumError& e) {
    std::cerr << "error: LQ design failed: " << e.what() << "\n";
    return kDesign;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
}
