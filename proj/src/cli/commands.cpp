#include "ccpj/cli/commands.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <ostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "ccpj/beam/beam.hpp"
#include "ccpj/calibrate/dataset.hpp"
#include "ccpj/calibrate/fit.hpp"
#include "ccpj/core/error.hpp"
#include "ccpj/core/parallel.hpp"
#include "ccpj/gait/sim.hpp"
#include "ccpj/kinematics/stroke.hpp"
#include "ccpj/optimizer/search.hpp"

#ifndef CCPJ_DEFAULT_DATA_DIR
#define CCPJ_DEFAULT_DATA_DIR "data"
#endif

namespace ccpj::cli {

namespace fs = std::filesystem;

Range Range::parse(const std::string& text) {
  std::array<double, 3> v{};
  std::size_t pos = 0;
  for (int k = 0; k < 3; ++k) {
    const auto colon = text.find(':', pos);
    const bool last = k == 2;
    if (last != (colon == std::string::npos)) {
      throw ConfigError(fmt::format("range '{}' must have the form a:b:step", text), "--range");
    }
    const std::string field = text.substr(pos, last ? std::string::npos : colon - pos);
    std::size_t used = 0;
    try {
      v[k] = std::stod(field, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != field.size() || !std::isfinite(v[k])) {
      throw ConfigError(fmt::format("range '{}': '{}' is not a number", text, field), "--range");
    }
    pos = colon + 1;
  }
  Range r{v[0], v[1], v[2]};
  if (!(r.step > 0.0) || r.end < r.begin) {
    throw ConfigError(fmt::format("range '{}' is empty (need a <= b and step > 0)", text),
                      "--range");
  }
  return r;
}

std::vector<double> Range::values() const {
  std::vector<double> out;
  const auto n = static_cast<long>(std::floor((end - begin) / step + 1e-9));
  for (long i = 0; i <= n; ++i) out.push_back(begin + static_cast<double>(i) * step);
  return out;
}

namespace {

double tightest_gap(const gait::Terrain& terrain) {
  const auto [gap, width] = gait::tightest_confinement(terrain);
  return gap.value_or(std::numeric_limits<double>::infinity());
}

io::RunReport new_report(const std::string& command, const io::Config& config) {
  io::RunReport r;
  r.command = command;
  r.scenario = config.name;
  r.digest = io::config_digest(config);
  return r;
}

[[noreturn]] void fail_partial(io::ArtifactWriter& w, io::RunReport& rep, const std::string& what) {
  rep.partial = true;
  rep.error = what;
  w.finish(rep);
  throw CommandFailed(what, kSimulationError);
}

io::Plot displacement_plot(const gait::SimTrace& trace, const std::string& name) {
  io::Series s{"body x", {}, {}};
  for (const auto& r : trace.records) {
    s.x.push_back(r.t);
    s.y.push_back(r.x_body * 1e3);
  }
  return {fmt::format("Displacement: {}", name), "time [s]", "displacement [mm]", {s}, std::nullopt};
}

// Simulated trace plus the summary metrics every simulate-style command shares.
void simulate_into(const io::Config& config, io::ArtifactWriter& w, io::RunReport& rep) {
  const auto& s = config.scenario;
  gait::SimTrace trace;
  try {
    if (s.terrain.confinement.empty()) {
      trace = gait::run(s);
    } else {
      const auto nav = gait::navigate_confined(s);
      trace = nav.trace;
      rep.notes.emplace_back("confined_mask", to_string(nav.mask));
      rep.flags.emplace_back("all_legs_feasible", nav.all_legs_feasible);
      rep.flags.emplace_back("front_only_feasible", nav.front_only_feasible);
      if (nav.confined_current) rep.metrics.emplace_back("confined_current_a", *nav.confined_current);
    }
  } catch (const InfeasibleConfinement& e) {
    rep.metrics.emplace_back("failure_time_s", e.time());
    fail_partial(w, rep, e.what());
  } catch (const NoConvergence& e) {
    fail_partial(w, rep, e.what());
  }

  const auto& recs = trace.records;
  double peak = 0.0;
  for (const auto& r : recs) peak = std::max(peak, r.height);
  rep.metrics.emplace_back("duration_s", recs.back().t);
  rep.metrics.emplace_back("distance_mm", (recs.back().x_body - recs.front().x_body) * 1e3);
  rep.metrics.emplace_back("average_speed_mm_s", gait::average_speed(trace) * 1e3);
  rep.metrics.emplace_back("peak_height_mm", peak * 1e3);
  const auto [lo, hi] = gait::front_angle_range(trace);
  if (hi > lo) {
    const kinematics::StrokeGeometry g{s.robot.leg.leg_length, lo, hi, s.signal.period};
    rep.metrics.emplace_back("analytic_speed_mm_s", kinematics::cycle_speed(g) * 1e3);
  }
  if (const auto pc = gait::peak_confined_height(trace)) {
    const double gap = tightest_gap(s.terrain);
    rep.metrics.emplace_back("peak_confined_height_mm", *pc * 1e3);
    bool fits = true;
    for (const auto& r : recs) fits = fits && (!r.confined || r.height <= gap);
    rep.flags.emplace_back("height_within_gap", fits);
  }
  w.write(rep, "trace.csv", io::format_trace_csv(trace));
  w.write(rep, "displacement.svg", io::render_svg(displacement_plot(trace, config.name)));
}

struct SweepParam {
  const char* name;
  const char* unit;
  double lo;
  double hi;
};

constexpr std::array<SweepParam, 4> kSweepParams{{
    {"period", "s", 0.5, 20.0},
    {"slope", "deg", -60.0, 60.0},
    {"payload", "g", 0.0, 1000.0},
    {"current", "a", 0.0, Current::kMaxAmps},
}};

const SweepParam& sweep_param(const std::string& name) {
  for (const auto& p : kSweepParams) {
    if (name == p.name) return p;
  }
  throw ConfigError(
      fmt::format("--param '{}' must be one of period, slope, payload, current", name), "--param");
}

double speed_with(const gait::Scenario& base, const std::string& param, double v) {
  gait::Scenario s = base;
  if (param == "period") return gait::speed_at_period(s, v);
  if (param == "slope") {
    s.terrain.slope = deg_to_rad(v);
  } else if (param == "payload") {
    s.payload_mass = v * 1e-3;
  } else {
    s.signal.i_high = Current(v);
  }
  return gait::speed_at_period(s, s.signal.period);
}

std::string shape_csv(const beam::BeamShape& shape) {
  std::string out = "arc_length_m,x_m,y_m\n";
  double arc = 0.0;
  const auto nodes = shape.nodes();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (i > 0) arc += std::hypot(nodes[i].x() - nodes[i - 1].x(), nodes[i].y() - nodes[i - 1].y());
    out += fmt::format("{:.6f},{:.9f},{:.9f}\n", arc, nodes[i].x(), nodes[i].y());
  }
  return out;
}

}  // namespace

io::RunReport cmd_simulate(const io::Config& config, const fs::path& out) {
  io::ArtifactWriter w(out);
  auto rep = new_report("simulate", config);
  simulate_into(config, w, rep);
  w.finish(rep);
  return rep;
}

io::RunReport cmd_sweep(const io::Config& config, const std::string& param, const Range& range,
                        const fs::path& out) {
  const auto& p = sweep_param(param);
  const auto xs = range.values();
  for (double v : xs) {
    if (v < p.lo || v > p.hi) {
      throw ConfigError(fmt::format("{} {} {} lies outside [{}, {}]", param, v, p.unit, p.lo, p.hi),
                        "--range");
    }
  }
  io::ArtifactWriter w(out);
  auto rep = new_report(fmt::format("sweep {}", param), config);
  std::vector<double> speeds;
  try {
    speeds = parallel_map(xs, [&](double v) { return speed_with(config.scenario, param, v); });
  } catch (const InfeasibleConfinement& e) {
    fail_partial(w, rep, e.what());
  } catch (const NoConvergence& e) {
    fail_partial(w, rep, e.what());
  }

  std::string csv = fmt::format("{}_{},speed_mm_s\n", param, p.unit);
  io::Series series{"speed", xs, {}};
  for (std::size_t i = 0; i < xs.size(); ++i) {
    csv += fmt::format("{:.6g},{:.6f}\n", xs[i], speeds[i] * 1e3);
    series.y.push_back(speeds[i] * 1e3);
  }
  const auto best = static_cast<std::size_t>(std::max_element(speeds.begin(), speeds.end()) -
                                             speeds.begin());
  rep.metrics.emplace_back("points", static_cast<double>(xs.size()));
  rep.metrics.emplace_back(fmt::format("argmax_{}_{}", param, p.unit), xs[best]);
  rep.metrics.emplace_back("max_speed_mm_s", speeds[best] * 1e3);
  bool nonincreasing = true;
  for (std::size_t i = 1; i < speeds.size(); ++i) nonincreasing = nonincreasing && speeds[i] <= speeds[i - 1];
  rep.flags.emplace_back("monotone_nonincreasing", nonincreasing);

  io::Plot plot{fmt::format("Speed over {}: {}", param, config.name),
                fmt::format("{} [{}]", param, p.unit), "speed [mm/s]", {series}, std::nullopt};
  if (param == "period") plot.marker = std::make_pair(xs[best], speeds[best] * 1e3);
  w.write(rep, fmt::format("sweep_{}.csv", param), csv);
  w.write(rep, fmt::format("sweep_{}.svg", param), io::render_svg(plot));
  w.finish(rep);
  return rep;
}

io::RunReport cmd_calibrate(const fs::path& dir, const io::Config& tmpl, const fs::path& out) {
  static const std::array<const char*, 3> kFiles{"stiffness_vs_current.csv", "speed_vs_period.csv",
                                                 "operating_points.csv"};
  std::vector<std::string> missing;
  for (const char* f : kFiles) {
    if (!fs::is_regular_file(dir / f)) missing.emplace_back(f);
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw DataError(fmt::format("missing datasets in '{}': {}", dir.string(), list));
  }
  const auto stiffness = calibrate::read_dataset(dir / kFiles[0]);
  const auto speed = calibrate::read_dataset(dir / kFiles[1]);
  const auto operating = calibrate::read_dataset(dir / kFiles[2]);
  const auto fit = calibrate::calibrate_all(stiffness, speed, operating, tmpl.scenario);

  io::Config calibrated = tmpl;
  calibrated.name = "tripodbot_calibrated";
  calibrated.stiffness = fit.stiffness.table;
  calibrated.scenario = fit.scenario;

  io::ArtifactWriter w(out);
  auto rep = new_report("calibrate", calibrated);
  rep.metrics = {
      {"stiffness_rmse_n_per_m", fit.stiffness.result.residual},
      {"stiffness_max_adjustment_n_per_m", fit.stiffness.max_adjustment},
      {"tau_heat_s", fit.thermal.actuator.tau_heat},
      {"tau_cool_s", fit.thermal.actuator.tau_cool},
      {"speed_rmse_mm_s", fit.thermal.rmse * 1e3},
      {"peak_period_s", fit.thermal.peak_period},
      {"eta0", fit.slip.slip.eta0},
      {"c_slope", fit.slip.slip.c_slope},
      {"c_load", fit.slip.slip.c_load},
  };
  rep.flags = {{"stiffness_adjusted", fit.stiffness.adjusted}, {"slip_clamped", fit.slip.clamped}};
  int k = 0;
  for (const auto& msg : fit.stiffness.warnings) rep.notes.emplace_back(fmt::format("warning_{}", k++), msg);
  for (const auto& msg : fit.slip.warnings) rep.notes.emplace_back(fmt::format("warning_{}", k++), msg);
  w.write(rep, "tripodbot.calibrated", io::format_config(calibrated));
  w.finish(rep);
  return rep;
}

io::RunReport cmd_optimize(const io::Config& config, const std::string& param,
                           const std::optional<Range>& range, const fs::path& out) {
  const auto& s = config.scenario;
  if (param == "period") {
    const Range r = range.value_or(Range{2.0, 10.0, 0.05});
    if (r.begin < 0.5 || r.end > 20.0 || !(r.end > r.begin)) {
      throw ConfigError("period search needs 0.5 <= a < b <= 20 s", "--range");
    }
    io::ArtifactWriter w(out);
    auto rep = new_report("optimize period", config);
    optimizer::PeriodOptimum opt;
    try {
      optimizer::SearchSpec spec;
      spec.lower = r.begin;
      spec.upper = r.end;
      spec.tolerance = r.step;
      opt = optimizer::optimize_period(spec, s);
    } catch (const NotUnimodal& e) {
      fail_partial(w, rep, e.what());
    }
    rep.metrics = {{"optimal_period_s", opt.period},
                   {"speed_mm_s", opt.speed * 1e3},
                   {"smoothed_speed_mm_s", opt.smoothed_speed * 1e3},
                   {"evaluations", static_cast<double>(opt.search.evaluations)}};
    std::string csv = "period_s,speed_mm_s\n";
    io::Series coarse{"coarse sweep", opt.search.coarse_x, {}};
    for (std::size_t i = 0; i < coarse.x.size(); ++i) {
      csv += fmt::format("{:.6g},{:.6f}\n", coarse.x[i], opt.search.coarse_value[i] * 1e3);
      coarse.y.push_back(opt.search.coarse_value[i] * 1e3);
    }
    w.write(rep, "optimize_period.csv", csv);
    w.write(rep, "optimize_period.svg",
            io::render_svg({fmt::format("Period search: {}", config.name), "period [s]",
                            "speed [mm/s]", {coarse}, std::make_pair(opt.period, opt.speed * 1e3)}));
    w.finish(rep);
    return rep;
  }
  if (param == "current") {
    const auto [gap, width] = gait::tightest_confinement(s.terrain);
    if (!gap) throw ConfigError("optimize current needs a confinement segment with gap_mm",
                                "terrain.confinement");
    io::ArtifactWriter w(out);
    auto rep = new_report("optimize current", config);
    const auto advice = optimizer::max_feasible_current(*gap, s.robot, s.posture, s.actuator, width);
    rep.metrics.emplace_back("gap_mm", *gap * 1e3);
    if (advice.current) rep.metrics.emplace_back("max_current_a", *advice.current);
    rep.flags.emplace_back("all_legs_feasible", advice.current.has_value());
    rep.notes.emplace_back("recommended_mask",
                           advice.recommended_mask ? to_string(*advice.recommended_mask) : "none");
    rep.notes.emplace_back("advice", advice.note);
    w.finish(rep);
    return rep;
  }
  if (param == "mask") {
    io::ArtifactWriter w(out);
    auto rep = new_report("optimize mask", config);
    optimizer::MaskChoice choice;
    try {
      choice = optimizer::select_mask(s);
    } catch (const AllMasksInfeasible& e) {
      fail_partial(w, rep, e.what());
    } catch (const ValidationError& e) {
      throw ConfigError(e.what(), "terrain.confinement");
    }
    rep.notes.emplace_back("selected_mask", to_string(choice.mask));
    rep.metrics.emplace_back("transit_time_s", choice.transit_time);
    for (const auto& o : choice.options) {
      const std::string m = to_string(o.mask);
      rep.flags.emplace_back(m + "_feasible", o.feasible);
      rep.metrics.emplace_back(m + "_transit_time_s", o.transit_time);
      if (o.current) rep.metrics.emplace_back(m + "_current_a", *o.current);
      if (!o.reason.empty()) rep.notes.emplace_back(m + "_reason", o.reason);
    }
    w.finish(rep);
    return rep;
  }
  throw ConfigError(fmt::format("--param '{}' must be one of period, current, mask", param),
                    "--param");
}

io::RunReport cmd_report(const io::Config& config, const fs::path& out) {
  io::ArtifactWriter w(out);
  auto rep = new_report("report", config);
  simulate_into(config, w, rep);

  // Speed over period.
  std::vector<double> periods;
  for (int i = 2; i <= 20; ++i) periods.push_back(0.5 * i);
  const auto speeds = parallel_map(periods, [&](double T) {
    return gait::speed_at_period(config.scenario, T);
  });
  std::string csv = "period_s,speed_mm_s\n";
  io::Series sp{"simulated", periods, {}};
  for (std::size_t i = 0; i < periods.size(); ++i) {
    csv += fmt::format("{:.6g},{:.6f}\n", periods[i], speeds[i] * 1e3);
    sp.y.push_back(speeds[i] * 1e3);
  }
  const auto best = static_cast<std::size_t>(std::max_element(speeds.begin(), speeds.end()) -
                                             speeds.begin());
  rep.metrics.emplace_back("sweep_peak_period_s", periods[best]);
  w.write(rep, "speed_vs_period.csv", csv);
  w.write(rep, "speed_vs_period.svg",
          io::render_svg({"Speed over actuation period", "period [s]", "speed [mm/s]", {sp},
                          std::make_pair(periods[best], speeds[best] * 1e3)}));

  // Bend-test stiffness over current against the table.
  const auto& leg = config.scenario.robot.leg;
  std::vector<double> currents;
  for (const auto& p : config.stiffness.points()) currents.push_back(p.current);
  const auto slopes = parallel_map(currents, [&](double i) {
    return beam::bend_curve(leg, beam::flexural_model_at(i, config.stiffness, leg)).slope;
  });
  csv = "current_a,table_n_per_m,bend_slope_n_per_m\n";
  io::Series tab{"table", currents, {}}, sim{"three-point bend", currents, slopes};
  double worst = 0.0;
  for (std::size_t i = 0; i < currents.size(); ++i) {
    const double k = config.stiffness.points()[i].value;
    tab.y.push_back(k);
    worst = std::max(worst, std::abs(slopes[i] / k - 1.0));
    csv += fmt::format("{:.4f},{:.6g},{:.6g}\n", currents[i], k, slopes[i]);
  }
  rep.metrics.emplace_back("bend_slope_max_rel_error", worst);
  w.write(rep, "stiffness_vs_current.csv", csv);
  w.write(rep, "stiffness_vs_current.svg",
          io::render_svg({"Apparent stiffness over current", "current [A]", "stiffness [N/m]",
                          {tab, sim}, std::nullopt}));

  // Self-deployment over current.
  std::vector<double> grid;
  for (int i = 0; i <= 20; ++i) grid.push_back(0.02 * i);
  const auto shapes = parallel_map(grid, [&](double i) {
    return beam::cantilever_deployment(i, config.stiffness, leg).shape;
  });
  csv = "current_a,chord_deviation_mm,tip_deflection_mm,deployed\n";
  io::Series dev{"chord deviation", grid, {}};
  std::optional<double> onset;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const bool deployed = beam::is_deployed(shapes[i], leg.leg_length);
    if (deployed && !onset) onset = grid[i];
    dev.y.push_back(shapes[i].max_chord_deviation() * 1e3);
    csv += fmt::format("{:.2f},{:.6f},{:.6f},{:d}\n", grid[i], dev.y.back(),
                       shapes[i].tip_deflection() * 1e3, static_cast<int>(deployed));
  }
  if (onset) rep.metrics.emplace_back("deployment_current_a", *onset);
  w.write(rep, "deployment_vs_current.csv", csv);
  w.write(rep, "deployment_vs_current.svg",
          io::render_svg({"Self-deployment over current", "current [A]", "chord deviation [mm]",
                          {dev}, std::nullopt}));
  w.write(rep, "shape_0.00A.csv", shape_csv(shapes.front()));
  w.write(rep, "shape_0.32A.csv", shape_csv(shapes[16]));
  w.finish(rep);
  return rep;
}

fs::path data_dir() {
  if (const char* env = std::getenv("CCPJ_DATA_DIR"); env && *env) return env;
  return CCPJ_DEFAULT_DATA_DIR;
}

namespace {

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

int report_error(std::ostream& err, const char* kind, const std::string& what, int code) {
  err << "error[" << kind << "]: " << one_line(what) << '\n';
  return code;
}

gait::Scenario calibration_template() {
  gait::Scenario s;
  s.terrain.surface = gait::Surface::kRatchet;
  s.terrain.mu_forward = 0.05;
  s.terrain.mu_backward = 1.0;
  return s;
}

void print_report(std::ostream& out, const io::RunReport& rep, const fs::path& dir) {
  out << rep.command << ": " << rep.scenario << " (digest " << rep.digest << ")\n";
  for (const auto& [k, v] : rep.metrics) out << fmt::format("  {}: {:.6g}\n", k, v);
  for (const auto& [k, v] : rep.flags) out << fmt::format("  {}: {}\n", k, v);
  for (const auto& [k, v] : rep.notes) out << fmt::format("  {}: {}\n", k, v);
  out << "  report: " << (dir / "report.yaml").string() << '\n';
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulation, calibration and optimization for the CCPJ TripodBot", "ccpj"};
  app.require_subcommand(1);
  std::string config;
  std::string outdir = "ccpj_out";
  std::string param;
  std::string range;
  bool quiet = false;

  auto common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("--config", config, "scenario or parameter file (YAML)");
    if (config_required) opt->required();
    sub->add_option("--out", outdir, "output directory")->capture_default_str();
    sub->add_flag("--quiet", quiet, "print nothing on success");
  };
  auto* sim = app.add_subcommand("simulate", "run a scenario; write trace.csv, displacement.svg");
  common(sim, true);
  auto* sweep = app.add_subcommand("sweep", "speed over period, slope, payload or current");
  common(sweep, true);
  sweep->add_option("--param", param, "period | slope | payload | current")->required();
  sweep->add_option("--range", range, "a:b:step (s, deg, g or A)")->required();
  auto* cal = app.add_subcommand("calibrate", "fit parameters to the datasets in $CCPJ_DATA_DIR");
  common(cal, false);
  auto* opt = app.add_subcommand("optimize", "best period, feasible current or leg mask");
  common(opt, true);
  opt->add_option("--param", param, "period | current | mask")->default_str("period");
  opt->add_option("--range", range, "period bounds and resolution a:b:step");
  auto* rep = app.add_subcommand("report", "figure-style CSV and SVG bundle for a scenario");
  common(rep, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    return report_error(err, "usage", e.what(), kConfigError);
  }

  try {
    auto load = [&] {
      io::Config c = io::load_config(config);
      return c;
    };
    io::RunReport result;
    if (sim->parsed()) {
      result = cmd_simulate(load(), outdir);
    } else if (sweep->parsed()) {
      const Range r = Range::parse(range);
      result = cmd_sweep(load(), param, r, outdir);
    } else if (cal->parsed()) {
      io::Config tmpl;
      if (config.empty()) {
        tmpl.name = "tripodbot";
        tmpl.scenario = calibration_template();
      } else {
        tmpl = load();
      }
      result = cmd_calibrate(data_dir(), tmpl, outdir);
    } else if (opt->parsed()) {
      std::optional<Range> r;
      if (!range.empty()) r = Range::parse(range);
      result = cmd_optimize(load(), param.empty() ? "period" : param, r, outdir);
    } else {
      result = cmd_report(load(), outdir);
    }
    if (!quiet) print_report(out, result, outdir);
    return kOk;
  } catch (const CommandFailed& e) {
    return report_error(err, "simulation", e.what(), e.exit_code());
  } catch (const ConfigError& e) {
    return report_error(err, "config", e.what(), kConfigError);
  } catch (const ValidationError& e) {
    return report_error(err, "config", e.what(), kConfigError);
  } catch (const OutOfRange& e) {
    return report_error(err, "config", e.what(), kConfigError);
  } catch (const DataError& e) {
    return report_error(err, "data", e.what(), kDataError);
  } catch (const EmptyDataset& e) {
    return report_error(err, "data", e.what(), kDataError);
  } catch (const NoFeasibleFit& e) {
    return report_error(err, "data", e.what(), kDataError);
  } catch (const SingularSystem& e) {
    return report_error(err, "data", e.what(), kDataError);
  } catch (const Error& e) {
    return report_error(err, "simulation", e.what(), kSimulationError);
  } catch (const std::exception& e) {
    return report_error(err, "internal", e.what(), kSimulationError);
  }
}

}  // namespace ccpj::cli
