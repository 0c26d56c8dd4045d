#include "ccpj/gait/sim.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "ccpj/core/parallel.hpp"

namespace ccpj::gait {

namespace {

constexpr std::size_t kFront = 0;
constexpr std::size_t kRear = 1;

struct ActiveLimits {
  bool confined = false;
  std::optional<double> gap;
  std::optional<double> width;
};

// Segments count as active one leg length before their entrance so that the
// robot has lowered itself by the time the body passes under the ceiling.
ActiveLimits active_limits(const Scenario& s, double x_body) {
  ActiveLimits out;
  const double lead = s.robot.leg.leg_length;
  for (const auto& seg : s.terrain.confinement) {
    if (x_body < seg.x_begin - lead || x_body > seg.x_end) continue;
    out.confined = true;
    if (seg.gap) out.gap = out.gap ? std::min(*out.gap, *seg.gap) : *seg.gap;
    if (seg.width) out.width = out.width ? std::min(*out.width, *seg.width) : *seg.width;
  }
  return out;
}

GaitSignal effective_signal(const Scenario& s, bool confined) {
  GaitSignal sig = s.signal;
  if (confined && s.confined_control) {
    sig.mask = to_enable_flags(s.confined_control->mask);
    if (s.confined_control->i_high) sig.i_high = Current(*s.confined_control->i_high);
  }
  return sig;
}

// Stand-up angle of a fully activated group; the posture saturates at the
// top of its table.
double top_angle(const Scenario& s, double i_on) {
  if (i_on < s.actuator.i_threshold) return 0.0;
  const double i = std::clamp(i_on, s.posture.min_current(), s.posture.max_current());
  return posture_beta(i, s.robot, s.posture);
}

double tip_slack(const Scenario& s, double tip_x) {
  if (s.terrain.surface != Surface::kRatchet) return 0.0;
  const double r = std::fmod(tip_x, s.terrain.pitch);
  return r < 0.0 ? r + s.terrain.pitch : r;
}

}  // namespace

GroupArray leg_reach(const RobotParams& robot, const GroupArray& beta) {
  const double l = robot.leg.leg_length;
  // Rear legs sit at +-120 deg azimuth, so only half their reach lies along x.
  return {l * std::cos(beta[kFront]), 0.5 * l * std::cos(beta[kRear])};
}

SimState initial_state(const Scenario& scenario) {
  SimState st;
  const GroupArray reach = leg_reach(scenario.robot, st.beta);
  st.x_body = reach[kRear];
  st.slack = {tip_slack(scenario, st.x_body + reach[kFront]), 0.0};
  st.height = body_height(scenario.robot, 0.0, 0.0);
  st.confined = active_limits(scenario, st.x_body).confined;
  st.rng.seed(scenario.seed);
  return st;
}

SimState step(const SimState& state, const Scenario& s, double dt) {
  SimState next = state;
  next.t = state.t + dt;

  const ActiveLimits limits = active_limits(s, state.x_body);
  next.confined = limits.confined;
  const GaitSignal sig = effective_signal(s, limits.confined);

  GroupArray top{};
  for (std::size_t g = 0; g < kGroupCount; ++g) {
    const auto group = static_cast<LegGroup>(g);
    const bool heating = sig.current_at(group, state.t) >= s.actuator.i_threshold;
    next.temperature[g] = s.actuator.advance(state.temperature[g], heating, dt);
    next.activation[g] = s.actuator.activation(next.temperature[g]);
    top[g] = sig.mask[g] ? top_angle(s, sig.i_high.amps()) : 0.0;
  }

  double cap_rear = s.robot.leg_tilt_deploy;
  if (limits.gap || limits.width) {
    const double gap = limits.gap.value_or(std::numeric_limits<double>::infinity());
    const double soft_height = body_height(s.robot, 0.0, 0.0);
    if (gap < soft_height) {
      throw InfeasibleConfinement(
          fmt::format("gap {:.2f} mm is below the {:.2f} mm height of the fully soft robot",
                      gap * 1e3, soft_height * 1e3),
          state.t);
    }
    const double min_beta = posture_min_beta(s.robot, s.posture);
    cap_rear = rear_cap(s.robot, gap);
    const bool rear_on = top[kRear] > 0.0;
    if (rear_on && cap_rear < min_beta) {
      throw InfeasibleConfinement(
          fmt::format("rear legs cannot stand below {:.2f} mm; gap is {:.2f} mm",
                      body_height(s.robot, 0.0, min_beta) * 1e3, gap * 1e3),
          state.t);
    }
    const double rear_worst = rear_on ? std::min(top[kRear], cap_rear) : 0.0;
    if (top[kFront] > 0.0 && front_cap(s.robot, gap, rear_worst) < min_beta) {
      throw InfeasibleConfinement(
          fmt::format("front leg cannot stand under a {:.2f} mm gap", gap * 1e3), state.t);
    }
    if (limits.width && rear_on && rear_width(s.robot, rear_worst) > *limits.width) {
      throw InfeasibleConfinement(
          fmt::format("driven rear legs span {:.2f} mm, tunnel is {:.2f} mm wide",
                      rear_width(s.robot, rear_worst) * 1e3, *limits.width * 1e3),
          state.t);
    }
  }

  next.beta[kRear] = std::min(next.activation[kRear] * top[kRear], cap_rear);
  double cap_front = s.robot.leg_tilt_deploy;
  if (limits.gap) cap_front = front_cap(s.robot, *limits.gap, next.beta[kRear]);
  next.beta[kFront] = std::min(next.activation[kFront] * top[kFront], cap_front);

  // Desired ground motion of each tip if the body stood still. A tip may move
  // backward only by its remaining slack; anything beyond that has to come
  // from the body moving forward.
  const GroupArray before = leg_reach(s.robot, state.beta);
  const GroupArray after = leg_reach(s.robot, next.beta);
  const GroupArray desired{after[kFront] - before[kFront], -(after[kRear] - before[kRear])};
  double required = 0.0;
  for (std::size_t g = 0; g < kGroupCount; ++g) {
    required = std::max(required, -desired[g] - state.slack[g]);
  }

  // Perfect anchors lose nothing, except in the front-only gait where the
  // soft rear pair is dragged along regardless of how well the tips hold.
  double eta = 1.0;
  const bool front_only = sig.mask[kFront] && !sig.mask[kRear];
  if (!s.terrain.perfect_anchoring() || front_only) {
    eta = s.slip.efficiency(s.terrain.slope, s.payload_mass / s.robot.total_mass, front_only);
    if (s.slip.noise_sd > 0.0 && required > 0.0) {
      std::normal_distribution<double> noise(0.0, s.slip.noise_sd);
      eta = std::clamp(eta + noise(next.rng), 0.0, 1.0);
    }
  }
  const double dx = eta * required;
  next.x_body = state.x_body + dx;

  const GroupArray tips{next.x_body + after[kFront], next.x_body - after[kRear]};
  for (std::size_t g = 0; g < kGroupCount; ++g) {
    const double move = desired[g] + dx;
    next.anchored[g] = move <= 0.0;
    next.slack[g] = move > 0.0 ? tip_slack(s, tips[g]) : std::max(0.0, state.slack[g] + move);
  }
  next.height = body_height(s.robot, next.beta[kFront], next.beta[kRear]);
  return next;
}

namespace {

TraceRecord record_of(const SimState& st) {
  return {st.t, st.x_body, st.beta, st.activation, st.anchored, st.height, st.confined};
}

}  // namespace

SimTrace run(const Scenario& scenario) {
  scenario.validate();
  SimTrace trace;
  trace.period = scenario.signal.period;
  trace.dt = scenario.dt;
  const auto steps = static_cast<std::size_t>(std::llround(scenario.duration / scenario.dt));
  trace.records.reserve(steps + 1);
  SimState st = initial_state(scenario);
  trace.records.push_back(record_of(st));
  for (std::size_t k = 1; k <= steps; ++k) {
    st = step(st, scenario, scenario.dt);
    // Time from the step index avoids drift from repeated addition.
    st.t = static_cast<double>(k) * scenario.dt;
    trace.records.push_back(record_of(st));
  }
  return trace;
}

double average_speed(const SimTrace& trace) {
  if (trace.records.size() < 2 || !(trace.period > 0.0)) return 0.0;
  const double t_end = trace.records.back().t;
  const double cycles = std::floor(t_end / trace.period + 1e-9);
  if (cycles < 1.0) return 0.0;
  const double t_stop = cycles * trace.period;
  const auto idx = static_cast<std::size_t>(std::llround(t_stop / trace.dt));
  const auto& rec = trace.records.at(std::min(idx, trace.records.size() - 1));
  return (rec.x_body - trace.records.front().x_body) / t_stop;
}

std::pair<double, double> front_angle_range(const SimTrace& trace) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& r : trace.records) {
    lo = std::min(lo, r.beta[kFront]);
    hi = std::max(hi, r.beta[kFront]);
  }
  return {lo, hi};
}

std::optional<double> peak_confined_height(const SimTrace& trace) {
  std::optional<double> peak;
  for (const auto& r : trace.records) {
    if (r.confined) peak = std::max(peak.value_or(0.0), r.height);
  }
  return peak;
}

double speed_at_period(const Scenario& scenario, double period) {
  if (!(period >= 0.5 && period <= 20.0)) {
    throw ValidationError(ValidationError::Kind::kOutOfBounds,
                          fmt::format("period {} s outside [0.5, 20] s", period));
  }
  Scenario s = scenario;
  s.signal.period = period;
  // Keep an integer number of steps per period so switching instants fall on the grid.
  const double per_period = std::ceil(period / std::min(scenario.dt, period / 100.0) - 1e-9);
  s.dt = period / per_period;
  s.duration = std::max(scenario.duration, 3.0 * period);
  return average_speed(run(s));
}

std::vector<SpeedPoint> sweep_period(const Scenario& scenario, const std::vector<double>& periods) {
  const auto speeds =
      parallel_map(periods, [&scenario](double T) { return speed_at_period(scenario, T); });
  std::vector<SpeedPoint> out;
  for (std::size_t i = 0; i < periods.size(); ++i) out.push_back({periods[i], speeds[i]});
  return out;
}

std::pair<std::optional<double>, std::optional<double>> tightest_confinement(
    const Terrain& terrain) {
  std::optional<double> gap;
  std::optional<double> width;
  for (const auto& seg : terrain.confinement) {
    if (seg.gap) gap = gap ? std::min(*gap, *seg.gap) : *seg.gap;
    if (seg.width) width = width ? std::min(*width, *seg.width) : *seg.width;
  }
  return {gap, width};
}

NavigationReport navigate_confined(const Scenario& scenario) {
  const auto [gap, width] = tightest_confinement(scenario.terrain);
  if (!gap && !width) {
    throw ValidationError(ValidationError::Kind::kInvalidParameter,
                          "navigate_confined needs a ceiling or tunnel segment");
  }
  const double g = gap.value_or(std::numeric_limits<double>::infinity());
  auto feasible = [&](LegMask mask) {
    return max_feasible_current(g, width, mask, scenario.robot, scenario.posture,
                                scenario.actuator);
  };
  const auto all_current = feasible(LegMask::kAllLegs);
  const auto front_current = feasible(LegMask::kFrontOnly);

  NavigationReport report;
  report.all_legs_feasible = all_current.has_value();
  report.front_only_feasible = front_current.has_value();

  ConfinedControl control;
  if (scenario.confined_control) {
    control = *scenario.confined_control;
  } else {
    control.mask = report.all_legs_feasible ? LegMask::kAllLegs : LegMask::kFrontOnly;
  }
  report.mask = control.mask;
  const auto& best = control.mask == LegMask::kAllLegs ? all_current : front_current;
  if (!control.i_high && best) {
    control.i_high = std::min(scenario.signal.i_high.amps(), *best);
  }
  report.confined_current = control.i_high;

  Scenario s = scenario;
  s.confined_control = control;
  report.trace = run(s);
  return report;
}

}  // namespace ccpj::gait
