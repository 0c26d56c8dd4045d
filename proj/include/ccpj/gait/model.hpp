#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "ccpj/core/calibration_table.hpp"
#include "ccpj/core/params.hpp"

namespace ccpj::gait {

/// Thermal lag of the SMA cords.
///
/// A normalized cord temperature relaxes toward 1 while the group current is
/// at or above `i_threshold` and toward 0 otherwise, with separate heating and
/// cooling time constants. Activation follows the temperature through the
/// phase-transformation band [band_start, band_finish].
struct ActuatorModel {
  double tau_heat = 1.044;   // s
  double tau_cool = 0.4526;  // s
  double i_threshold = 0.28; // A
  double band_start = 0.4;
  double band_finish = 0.85;

  void validate() const;

  /// Exact first-order update of the normalized temperature over `dt`.
  double advance(double temperature, bool heating, double dt) const;
  /// Activation in [0, 1] for a normalized temperature.
  double activation(double temperature) const;
};

/// Fraction of the ideal stroke realized as body motion:
/// eta = eta0 - c_slope sin(slope) - c_load payload/total_mass, clamped to [0, 1].
struct SlipModel {
  double eta0 = 0.7382;
  double c_slope = 2.025;
  double c_load = 0.2976;
  double eta_front_only = 0.25;  // replaces eta0 when only the front leg is driven
  double noise_sd = 0.0;         // per-step Gaussian perturbation of eta, off by default

  double efficiency(double slope, double payload_ratio, bool front_only) const;
  void validate() const;
};

enum class Surface { kSmooth, kRatchet };

/// A stretch of track with a ceiling and/or side walls. Bounds refer to the
/// body position; the robot also treats the last leg length before the start
/// as confined so it can lower itself ahead of the entrance.
struct ConfinedSegment {
  double x_begin = -std::numeric_limits<double>::infinity();  // m
  double x_end = std::numeric_limits<double>::infinity();     // m
  std::optional<double> gap;    // m, ceiling clearance
  std::optional<double> width;  // m, tunnel width

  bool contains(double x) const { return x >= x_begin && x <= x_end; }
};

struct Terrain {
  double slope = 0.0;  // rad, positive uphill
  Surface surface = Surface::kSmooth;
  double pitch = 3e-3;         // m, ratchet tooth spacing
  double tooth_height = 0.5e-3;// m
  double mu_forward = 0.0;
  double mu_backward = std::numeric_limits<double>::infinity();
  std::vector<ConfinedSegment> confinement;

  bool perfect_anchoring() const { return mu_backward == std::numeric_limits<double>::infinity(); }
  void validate() const;
};

/// Drive used while the robot is inside a confined segment.
struct ConfinedControl {
  LegMask mask = LegMask::kAllLegs;
  std::optional<double> i_high;  // A; keeps the open-field level when unset
};

struct Scenario {
  RobotParams robot;
  Terrain terrain;
  GaitSignal signal;
  double payload_mass = 0.0;  // kg
  double duration = 60.0;     // s
  double dt = 0.02;           // s
  ActuatorModel actuator;
  SlipModel slip;
  CalibrationTable posture = default_posture_table();  // current -> standing height
  std::optional<ConfinedControl> confined_control;
  std::uint64_t seed = 0;

  /// Throws ValidationError on violated invariants (dt <= period/100,
  /// duration > period, and the component invariants).
  void validate() const;
};

/// Stand-up angle a leg group settles at when driven at `current`, from the
/// posture calibration. Requires current within the posture table.
double posture_beta(double current, const RobotParams& robot, const CalibrationTable& posture);

/// Lowest stand-up angle any above-threshold drive can hold.
double posture_min_beta(const RobotParams& robot, const CalibrationTable& posture);

/// Body height for given front and rear contact angles. The front leg carries
/// one third of the body, the rear pair two thirds.
double body_height(const RobotParams& robot, double beta_front, double beta_rear);

/// Lateral extent with the rear pair at contact angle `beta_rear`.
double rear_width(const RobotParams& robot, double beta_rear);

/// Largest rear angle that keeps the body under `gap`.
double rear_cap(const RobotParams& robot, double gap);
/// Largest front angle that keeps the body under `gap` given the rear angle.
double front_cap(const RobotParams& robot, double gap, double beta_rear);

/// Largest drive current on the 0.005 A grid from the actuation threshold up
/// to the top of the posture table whose steady posture fits under `gap` (and
/// within `width` when the rear pair is driven). nullopt when none fits.
std::optional<double> max_feasible_current(double gap, std::optional<double> width, LegMask mask,
                                            const RobotParams& robot,
                                            const CalibrationTable& posture,
                                            const ActuatorModel& actuator);

}  // namespace ccpj::gait
