#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ccpj/gait/model.hpp"

namespace ccpj::optimizer {

enum class Objective { kMaxSpeed, kMinTransitTime };

struct SearchSpec {
  Objective objective = Objective::kMaxSpeed;
  double lower = 2.0;          // period bounds, s
  double upper = 10.0;
  double tolerance = 0.05;     // abscissa resolution, s
  // On a ratchet each cycle advances a whole number of teeth, so speed is a
  // sawtooth in the period. Each evaluation averages speed over
  // [T - smoothing, T + smoothing] to search the envelope instead.
  double smoothing = 0.15;     // s, 0 disables
  int smoothing_points = 7;

  void validate() const;
};

struct Maximum {
  double x = 0.0;
  double value = 0.0;
  std::vector<double> coarse_x;      // pre-flight samples
  std::vector<double> coarse_value;
  int evaluations = 0;
};

/// Golden-section maximization of `f` on [lower, upper] after a 5-point
/// coarse sweep. The search is bracketed around the coarse argmax. Throws
/// NotUnimodal when the sweep shows two local maxima separated by a dip deeper
/// than `value_tolerance`.
Maximum maximize_unimodal(const std::function<double(double)>& f, double lower, double upper,
                          double tolerance, double value_tolerance);

struct PeriodOptimum {
  double period = 0.0;          // s
  double speed = 0.0;           // m/s, unsmoothed at `period`
  double smoothed_speed = 0.0;  // m/s, the maximized objective
  Maximum search;
};

/// Fastest actuation period for the scenario.
PeriodOptimum optimize_period(const SearchSpec& spec, const gait::Scenario& scenario);

struct CurrentAdvice {
  std::optional<double> current;  // A; nullopt when no all-legs drive fits
  std::optional<LegMask> recommended_mask;
  std::string note;
};

/// Largest all-legs drive current whose steady posture fits under `gap`,
/// with a front-leg-only recommendation when none does.
CurrentAdvice max_feasible_current(double gap, const RobotParams& robot,
                                   const CalibrationTable& posture,
                                   const gait::ActuatorModel& actuator = {},
                                   std::optional<double> width = std::nullopt);

struct MaskOption {
  LegMask mask = LegMask::kAllLegs;
  bool feasible = false;
  double transit_time = 0.0;  // s; infinity when the segment is not cleared in time
  std::optional<double> current;
  std::string reason;  // why the mask is infeasible
};

struct MaskChoice {
  LegMask mask = LegMask::kAllLegs;
  double transit_time = 0.0;
  std::vector<MaskOption> options;
};

/// Time at which the body first passes the end of the last confined segment.
double transit_time(const gait::Scenario& scenario, LegMask mask);

/// Evaluates {all legs, front only} through the confined scenario and returns
/// the feasible mask with the least transit time. Throws AllMasksInfeasible.
MaskChoice select_mask(const gait::Scenario& scenario);

}  // namespace ccpj::optimizer
