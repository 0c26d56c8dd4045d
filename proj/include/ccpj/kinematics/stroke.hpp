#pragma once

#include "ccpj/core/units.hpp"

namespace ccpj::kinematics {

/// Maximum contact angle a straight leg reaches when standing.
inline constexpr double kMaxContactAngle = deg_to_rad(60.0);

/// One sit-down/stand-up cycle of the front leg.
struct StrokeGeometry {
  double leg_length = 65e-3;  // m
  double alpha = 0.0;         // rad, contact angle when sat down
  double beta = 0.0;          // rad, contact angle when stood up
  double period = 4.0;        // s

  /// Throws ValidationError unless 0 <= alpha <= beta <= 60 deg, L > 0 and T > 0.
  void validate() const;
};

/// Body advance while sitting down, with the rear pair anchored:
/// L (cos a - cos b) / 2.
double sit_advance(const StrokeGeometry& g);

/// Body advance while standing up, with the front claw anchored:
/// L (cos a - cos b).
double stand_advance(const StrokeGeometry& g);

/// Average speed of perfect stick-slip crawling, 3 L (cos a - cos b) / (2 T).
double cycle_speed(const StrokeGeometry& g);

/// Stand-up angle whose ideal cycle speed equals `speed`.
/// Throws Unreachable when `speed` exceeds the 60 deg bound.
double invert_beta(double speed, double leg_length, double period, double alpha = 0.0);

/// Body height with the front leg at contact angle `beta`: L sin b + offset.
double standing_height(double leg_length, double beta, double height_offset);

/// Inverse of standing_height on [offset, L sin 60 deg + offset].
double beta_for_height(double leg_length, double height, double height_offset);

}  // namespace ccpj::kinematics
