#pragma once

#include <array>
#include <optional>
#include <random>
#include <vector>

#include "ccpj/gait/model.hpp"

namespace ccpj::gait {

using GroupArray = std::array<double, kGroupCount>;

struct SimState {
  double t = 0.0;
  double x_body = 0.0;     // m, body reference point
  GroupArray temperature{};  // normalized cord temperature per leg group
  GroupArray activation{};
  GroupArray beta{};         // rad, contact angle per leg group
  GroupArray slack{};        // m, backward travel left before a tip catches a tooth
  std::array<bool, kGroupCount> anchored{true, true};
  double height = 0.0;       // m
  bool confined = false;     // inside (or just ahead of) a confined segment
  std::mt19937_64 rng;
};

/// Robot sat down at rest with the rear tips on the origin anchor.
SimState initial_state(const Scenario& scenario);

/// Horizontal reach of the front tip ahead of the body (index 0) and of the
/// rear tips behind it (index 1).
GroupArray leg_reach(const RobotParams& robot, const GroupArray& beta);

/// Advances the quasi-static state by `dt`. Throws InfeasibleConfinement when
/// a confined segment cannot be entered with the active drive.
SimState step(const SimState& state, const Scenario& scenario, double dt);

struct TraceRecord {
  double t = 0.0;
  double x_body = 0.0;
  GroupArray beta{};
  GroupArray activation{};
  std::array<bool, kGroupCount> anchored{};
  double height = 0.0;
  bool confined = false;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

struct SimTrace {
  double period = 0.0;
  double dt = 0.0;
  std::vector<TraceRecord> records;

  friend bool operator==(const SimTrace&, const SimTrace&) = default;
};

/// Full simulation of a scenario. Deterministic for a given (scenario, seed).
/// InfeasibleConfinement carries the time of the failing step.
SimTrace run(const Scenario& scenario);

/// Displacement over the whole actuation cycles contained in the trace,
/// divided by their duration (m/s).
double average_speed(const SimTrace& trace);

/// Extremes of the front contact angle over the trace: (min, max).
std::pair<double, double> front_angle_range(const SimTrace& trace);

/// Largest body height recorded while inside a confined segment.
std::optional<double> peak_confined_height(const SimTrace& trace);

struct SpeedPoint {
  double period = 0.0;  // s
  double speed = 0.0;   // m/s
};

/// Average speed at each period. dt is capped at period/100 and the duration
/// extended to cover at least three cycles. Periods must lie in [0.5, 20] s.
std::vector<SpeedPoint> sweep_period(const Scenario& scenario, const std::vector<double>& periods);

/// Average speed of `scenario` run at period `period`, as in sweep_period.
double speed_at_period(const Scenario& scenario, double period);

struct NavigationReport {
  SimTrace trace;
  LegMask mask = LegMask::kAllLegs;
  std::optional<double> confined_current;  // A, drive used inside the segment
  bool all_legs_feasible = false;
  bool front_only_feasible = false;
};

/// Runs a scenario with confinement. Unless the scenario forces a mask the
/// all-legs gait is used when it fits and the front-leg-only gait otherwise;
/// unless it forces a current, the drive inside the segment is lowered to the
/// largest feasible current for that mask. Throws InfeasibleConfinement when
/// the chosen mask cannot pass.
NavigationReport navigate_confined(const Scenario& scenario);

/// Tightest gap and width over all confined segments.
std::pair<std::optional<double>, std::optional<double>> tightest_confinement(const Terrain& terrain);

}  // namespace ccpj::gait
