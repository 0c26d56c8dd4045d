#include "ccpj/optimizer/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "ccpj/core/error.hpp"
#include "ccpj/core/parallel.hpp"
#include "ccpj/gait/sim.hpp"

namespace ccpj::optimizer {

void SearchSpec::validate() const {
  if (!(lower < upper)) {
    throw ValidationError(ValidationError::Kind::kInvalidParameter,
                          fmt::format("search bounds [{}, {}] are degenerate", lower, upper));
  }
  if (!(tolerance > 0.0)) {
    throw ValidationError(ValidationError::Kind::kInvalidParameter, "tolerance must be positive");
  }
  if (!(smoothing >= 0.0) || (smoothing > 0.0 && smoothing_points < 2)) {
    throw ValidationError(ValidationError::Kind::kInvalidParameter,
                          "smoothing needs a non-negative width and at least 2 points");
  }
}

Maximum maximize_unimodal(const std::function<double(double)>& f, double lower, double upper,
                          double tolerance, double value_tolerance) {
  if (!(lower < upper) || !(tolerance > 0.0)) {
    throw ValidationError(ValidationError::Kind::kInvalidParameter,
                          "maximize_unimodal needs lower < upper and tolerance > 0");
  }
  Maximum out;
  constexpr int kCoarse = 5;
  for (int i = 0; i < kCoarse; ++i) {
    const double x = lower + (upper - lower) * i / (kCoarse - 1);
    out.coarse_x.push_back(x);
    out.coarse_value.push_back(f(x));
  }
  out.evaluations = kCoarse;
  const auto& v = out.coarse_value;
  for (int i = 0; i < kCoarse; ++i) {
    for (int j = i + 2; j < kCoarse; ++j) {
      const double dip = *std::min_element(v.begin() + i + 1, v.begin() + j);
      if (v[i] - dip > value_tolerance && v[j] - dip > value_tolerance) {
        throw NotUnimodal(fmt::format(
            "coarse sweep has separate maxima at {:.3g} and {:.3g} with a dip of {:.3g} between",
            out.coarse_x[i], out.coarse_x[j], std::min(v[i], v[j]) - dip));
      }
    }
  }

  const auto k = static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
  out.x = out.coarse_x[k];
  out.value = v[k];
  double a = out.coarse_x[std::max(k - 1, 0)];
  double b = out.coarse_x[std::min(k + 1, kCoarse - 1)];

  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c);
  double fd = f(d);
  out.evaluations += 2;
  auto consider = [&](double x, double fx) {
    if (fx > out.value) {
      out.value = fx;
      out.x = x;
    }
  };
  consider(c, fc);
  consider(d, fd);
  while (b - a > tolerance) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
      consider(c, fc);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
      consider(d, fd);
    }
    ++out.evaluations;
  }
  return out;
}

PeriodOptimum optimize_period(const SearchSpec& spec, const gait::Scenario& scenario) {
  spec.validate();
  // Transit time over a fixed distance is minimized by the same period that
  // maximizes speed, so both objectives share the search.
  auto speed = [&scenario](double T) { return gait::speed_at_period(scenario, T); };
  auto smoothed = [&](double T) {
    if (spec.smoothing == 0.0) return speed(T);
    const double a = std::max(0.5, T - spec.smoothing);
    const double b = std::min(20.0, T + spec.smoothing);
    std::vector<double> ts;
    for (int k = 0; k < spec.smoothing_points; ++k) {
      ts.push_back(a + (b - a) * k / (spec.smoothing_points - 1));
    }
    const auto vs = parallel_map(ts, speed);
    double sum = 0.0;
    for (double v : vs) sum += v;
    return sum / static_cast<double>(vs.size());
  };
  const double v_scale = std::max(smoothed(0.5 * (spec.lower + spec.upper)), 1e-9);
  PeriodOptimum out;
  out.search = maximize_unimodal(smoothed, spec.lower, spec.upper, spec.tolerance, 0.02 * v_scale);
  out.period = out.search.x;
  out.smoothed_speed = out.search.value;
  out.speed = speed(out.period);
  return out;
}

CurrentAdvice max_feasible_current(double gap, const RobotParams& robot,
                                   const CalibrationTable& posture,
                                   const gait::ActuatorModel& actuator,
                                   std::optional<double> width) {
  CurrentAdvice out;
  out.current =
      gait::max_feasible_current(gap, width, LegMask::kAllLegs, robot, posture, actuator);
  if (out.current) {
    out.recommended_mask = LegMask::kAllLegs;
    out.note = fmt::format("all legs at up to {:.3f} A fit under {:.1f} mm", *out.current,
                           gap * 1e3);
    return out;
  }
  const auto front =
      gait::max_feasible_current(gap, width, LegMask::kFrontOnly, robot, posture, actuator);
  if (front) {
    out.recommended_mask = LegMask::kFrontOnly;
    out.note = fmt::format(
        "no all-legs drive fits under {:.1f} mm; actuate the front leg only (up to {:.3f} A)",
        gap * 1e3, *front);
  } else {
    out.note = fmt::format("no drive fits under {:.1f} mm", gap * 1e3);
  }
  return out;
}

namespace {

double segment_exit(const gait::Terrain& terrain) {
  double x = -std::numeric_limits<double>::infinity();
  for (const auto& seg : terrain.confinement) x = std::max(x, seg.x_end);
  return x;
}

double first_passage(const gait::SimTrace& trace, double x_exit) {
  for (const auto& r : trace.records) {
    if (r.x_body >= x_exit) return r.t;
  }
  return std::numeric_limits<double>::infinity();
}

}  // namespace

double transit_time(const gait::Scenario& scenario, LegMask mask) {
  gait::Scenario s = scenario;
  gait::ConfinedControl control;
  if (scenario.confined_control) control = *scenario.confined_control;
  control.mask = mask;
  s.confined_control = control;
  const auto report = gait::navigate_confined(s);
  return first_passage(report.trace, segment_exit(scenario.terrain));
}

MaskChoice select_mask(const gait::Scenario& scenario) {
  if (scenario.terrain.confinement.empty()) {
    throw ValidationError(ValidationError::Kind::kInvalidParameter,
                          "select_mask needs a confined segment");
  }
  MaskChoice out;
  out.transit_time = std::numeric_limits<double>::infinity();
  bool any = false;
  for (LegMask mask : {LegMask::kAllLegs, LegMask::kFrontOnly}) {
    MaskOption opt;
    opt.mask = mask;
    gait::Scenario s = scenario;
    s.confined_control = gait::ConfinedControl{mask, std::nullopt};
    try {
      const auto report = gait::navigate_confined(s);
      opt.feasible = true;
      opt.current = report.confined_current;
      opt.transit_time = first_passage(report.trace, segment_exit(scenario.terrain));
    } catch (const InfeasibleConfinement& e) {
      opt.reason = e.what();
      opt.transit_time = std::numeric_limits<double>::infinity();
    }
    if (opt.feasible && (!any || opt.transit_time < out.transit_time)) {
      any = true;
      out.mask = mask;
      out.transit_time = opt.transit_time;
    }
    out.options.push_back(opt);
  }
  if (!any) {
    throw AllMasksInfeasible(fmt::format("no leg mask passes: all legs ({}); front only ({})",
                                         out.options[0].reason, out.options[1].reason));
  }
  return out;
}

}  // namespace ccpj::optimizer
