#include <sstream>
#include <string>
#include <vector>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ccpj/beam/beam.hpp"
#include "ccpj/calibrate/fit.hpp"
#include "ccpj/cli/commands.hpp"
#include "ccpj/gait/sim.hpp"
#include "ccpj/gait/statics.hpp"
#include "ccpj/io/config.hpp"
#include "ccpj/kinematics/stroke.hpp"
#include "ccpj/optimizer/search.hpp"

namespace py = pybind11;
using namespace py::literals;

namespace ccpj {
namespace {

template <typename F>
py::array_t<double> column(const std::vector<gait::TraceRecord>& records, F field) {
  py::array_t<double> out(static_cast<py::ssize_t>(records.size()));
  auto v = out.mutable_unchecked<1>();
  for (std::size_t i = 0; i < records.size(); ++i) v(i) = field(records[i]);
  return out;
}

py::array_t<double> array(const std::vector<double>& values) {
  return py::array_t<double>(static_cast<py::ssize_t>(values.size()), values.data());
}

py::dict trace_dict(const gait::SimTrace& tr) {
  const auto& r = tr.records;
  py::dict d;
  d["t"] = column(r, [](const auto& x) { return x.t; });
  d["x"] = column(r, [](const auto& x) { return x.x_body; });
  d["beta_front"] = column(r, [](const auto& x) { return x.beta[0]; });
  d["beta_rear"] = column(r, [](const auto& x) { return x.beta[1]; });
  d["height"] = column(r, [](const auto& x) { return x.height; });
  d["anchored_front"] = column(r, [](const auto& x) { return double(x.anchored[0]); });
  d["anchored_rear"] = column(r, [](const auto& x) { return double(x.anchored[1]); });
  d["confined"] = column(r, [](const auto& x) { return double(x.confined); });
  d["period"] = tr.period;
  d["dt"] = tr.dt;
  d["average_speed"] = gait::average_speed(tr);
  return d;
}

py::dict simulate(const io::Config& config) {
  const auto& s = config.scenario;
  if (s.terrain.confinement.empty()) return trace_dict(gait::run(s));
  const auto nav = gait::navigate_confined(s);
  auto d = trace_dict(nav.trace);
  d["mask"] = std::string(to_string(nav.mask));
  d["confined_current"] = nav.confined_current;
  d["all_legs_feasible"] = nav.all_legs_feasible;
  d["front_only_feasible"] = nav.front_only_feasible;
  return d;
}

py::tuple run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"ccpj"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return py::make_tuple(code, out.str(), err.str());
}

}  // namespace
}  // namespace ccpj

PYBIND11_MODULE(_ccpj, m) {
  using namespace ccpj;
  m.doc() = "Tripod crawler simulator core. SI units throughout: m, s, rad, kg, A.";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<InfeasibleConfinement>(m, "InfeasibleConfinement", base.ptr());

  // Stroke model.
  auto stroke = [](double leg_length, double alpha, double beta, double period) {
    kinematics::StrokeGeometry g{leg_length, alpha, beta, period};
    g.validate();
    return g;
  };
  m.def("sit_advance",
        [=](double l, double a, double b) { return kinematics::sit_advance(stroke(l, a, b, 1.0)); },
        "leg_length"_a, "alpha"_a, "beta"_a);
  m.def("stand_advance",
        [=](double l, double a, double b) { return kinematics::stand_advance(stroke(l, a, b, 1.0)); },
        "leg_length"_a, "alpha"_a, "beta"_a);
  m.def("cycle_speed",
        [=](double l, double a, double b, double t) {
          return kinematics::cycle_speed(stroke(l, a, b, t));
        },
        "leg_length"_a, "alpha"_a, "beta"_a, "period"_a);
  m.def("invert_beta", &kinematics::invert_beta, "speed"_a, "leg_length"_a, "period"_a,
        "alpha"_a = 0.0);

  // Robot arithmetic.
  m.def("compaction_ratio", [] { return compaction_ratio(RobotParams{}); });
  m.def("weight_bearing_ratio", [](double load) { return weight_bearing_ratio(load, RobotParams{}); },
        "load_mass"_a);

  py::class_<io::Config>(m, "Config")
      .def(py::init<>())
      .def_static("load", [](const std::string& path) { return io::load_config(path); }, "path"_a)
      .def_static("parse", [](const std::string& text) { return io::parse_config(text); }, "text"_a)
      .def_readwrite("name", &io::Config::name)
      .def_property(
          "period", [](const io::Config& c) { return c.scenario.signal.period; },
          [](io::Config& c, double v) { c.scenario.signal.period = v; })
      .def_property(
          "duration", [](const io::Config& c) { return c.scenario.duration; },
          [](io::Config& c, double v) { c.scenario.duration = v; })
      .def_property(
          "dt", [](const io::Config& c) { return c.scenario.dt; },
          [](io::Config& c, double v) { c.scenario.dt = v; })
      .def_property(
          "slope", [](const io::Config& c) { return c.scenario.terrain.slope; },
          [](io::Config& c, double v) { c.scenario.terrain.slope = v; })
      .def_property(
          "payload_mass", [](const io::Config& c) { return c.scenario.payload_mass; },
          [](io::Config& c, double v) { c.scenario.payload_mass = v; })
      .def_property(
          "seed", [](const io::Config& c) { return c.scenario.seed; },
          [](io::Config& c, std::uint64_t v) { c.scenario.seed = v; })
      .def("digest", &io::config_digest)
      .def("to_yaml", &io::format_config)
      .def("validate", [](const io::Config& c) { c.scenario.validate(); })
      .def("__repr__", [](const io::Config& c) { return "<Config " + c.name + ">"; });

  // Legs.
  m.def("stiffness_at",
        [](double current, const io::Config& c) { return beam::stiffness_at(current, c.stiffness); },
        "current"_a, "config"_a = io::Config{});
  m.def(
      "cantilever_deployment",
      [](double current, const io::Config& c) {
        const auto& leg = c.scenario.robot.leg;
        const auto eq = beam::cantilever_deployment(current, c.stiffness, leg);
        const auto nodes = eq.shape.nodes();
        py::array_t<double> xy({static_cast<py::ssize_t>(nodes.size()), py::ssize_t{2}});
        auto v = xy.mutable_unchecked<2>();
        for (std::size_t i = 0; i < nodes.size(); ++i) v(i, 0) = nodes[i].x(), v(i, 1) = nodes[i].y();
        py::dict d;
        d["nodes"] = xy;
        d["deployed"] = beam::is_deployed(eq.shape, leg.leg_length);
        d["max_deviation"] = eq.shape.max_chord_deviation();
        d["tip_deflection"] = eq.shape.tip_deflection();
        d["energy"] = eq.energy;
        d["iterations"] = eq.iterations;
        return d;
      },
      "current"_a, "config"_a = io::Config{});
  m.def(
      "bend_curve",
      [](double current, const io::Config& c) {
        const auto& leg = c.scenario.robot.leg;
        const auto curve = beam::bend_curve(leg, beam::flexural_model_at(current, c.stiffness, leg));
        py::dict d;
        d["indentation"] = array(curve.indentation);
        d["force"] = array(curve.force);
        d["slope"] = curve.slope;
        d["linearity_error"] = curve.linearity_error;
        return d;
      },
      "current"_a, "config"_a = io::Config{});
  m.def(
      "static_load_check",
      [](double current, double load, const io::Config& c) {
        const auto r = gait::static_load_check(current, load, c.scenario.robot, c.stiffness);
        py::dict d;
        d["stands"] = r.stands;
        d["height"] = r.height;
        d["sag"] = r.sag;
        d["leg_force"] = r.leg_force;
        return d;
      },
      "current"_a, "load_mass"_a, "config"_a = io::Config{});

  // Locomotion.
  m.def("simulate", &simulate, "config"_a,
        "Trace columns as arrays; confined scenarios also report the chosen mask.");
  m.def(
      "sweep_period",
      [](const io::Config& c, const std::vector<double>& periods) {
        std::vector<double> speeds;
        for (const auto& p : gait::sweep_period(c.scenario, periods)) speeds.push_back(p.speed);
        return array(speeds);
      },
      "config"_a, "periods"_a);
  m.def(
      "optimize_period",
      [](const io::Config& c, double lower, double upper, double tolerance) {
        optimizer::SearchSpec spec;
        spec.lower = lower, spec.upper = upper, spec.tolerance = tolerance;
        const auto r = optimizer::optimize_period(spec, c.scenario);
        py::dict d;
        d["period"] = r.period;
        d["speed"] = r.speed;
        d["smoothed_speed"] = r.smoothed_speed;
        d["evaluations"] = r.search.evaluations;
        return d;
      },
      "config"_a, "lower"_a = 2.0, "upper"_a = 10.0, "tolerance"_a = 0.05);
  m.def(
      "max_feasible_current",
      [](double gap, const io::Config& c, std::optional<double> width) {
        const auto& s = c.scenario;
        const auto a = optimizer::max_feasible_current(gap, s.robot, s.posture, s.actuator, width);
        py::dict d;
        d["current"] = a.current;
        d["recommended_mask"] =
            a.recommended_mask ? py::object(py::str(to_string(*a.recommended_mask))) : py::none();
        d["note"] = a.note;
        return d;
      },
      "gap"_a, "config"_a = io::Config{}, "width"_a = py::none());

  // Calibration against a directory of datasets.
  m.def(
      "calibrate",
      [](const std::string& data_dir, const io::Config& tmpl) {
        const std::filesystem::path dir(data_dir);
        const auto fit = calibrate::calibrate_all(
            calibrate::read_dataset(dir / "stiffness_vs_current.csv"),
            calibrate::read_dataset(dir / "speed_vs_period.csv"),
            calibrate::read_dataset(dir / "operating_points.csv"), tmpl.scenario);
        std::map<std::string, double> params;
        for (const auto* r : {&fit.stiffness.result, &fit.thermal.result, &fit.slip.result}) {
          params.insert(r->parameters.begin(), r->parameters.end());
        }
        io::Config out = tmpl;
        out.stiffness = fit.stiffness.table;
        out.scenario = fit.scenario;
        return py::make_tuple(params, out);
      },
      "data_dir"_a, "template"_a = io::Config{},
      "Fitted parameters and the template with them applied.");

  m.def("run_cli", &run_cli, "args"_a, "Runs the command line in-process: (exit code, stdout, stderr).");
}
