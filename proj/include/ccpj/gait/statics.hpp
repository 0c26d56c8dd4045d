#pragma once

#include "ccpj/core/calibration_table.hpp"
#include "ccpj/core/params.hpp"

namespace ccpj::gait {

struct StaticLoadResult {
  bool stands = false;
  double height = 0.0;      // m, loaded standing height
  double sag = 0.0;         // m, drop of the body relative to the unloaded pose
  double leg_force = 0.0;   // N, vertical ground reaction per leg
};

/// Whether the tripod, all legs driven at `current`, holds `load` on its body.
///
/// Each leg is a strut clamped at the hip at the deployed tilt, with its tip
/// held against horizontal sliding, carrying a third of the robot weight plus
/// load. The robot stands iff the loaded body height stays within 10% of the
/// freestanding height.
StaticLoadResult static_load_check(double current, double load, const RobotParams& robot,
                                   const CalibrationTable& stiffness);

}  // namespace ccpj::gait
