#include "ccpj/kinematics/stroke.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "ccpj/core/error.hpp"

namespace ccpj::kinematics {

namespace {

void check_angle(double angle, const char* name) {
  if (!(angle >= 0.0 && angle <= kMaxContactAngle + 1e-12)) {
    throw ValidationError(ValidationError::Kind::kOutOfBounds,
                          fmt::format("{} = {:.4f} deg outside [0, 60] deg", name,
                                      rad_to_deg(angle)));
  }
}

double stroke(const StrokeGeometry& g) {
  g.validate();
  return g.leg_length * (std::cos(g.alpha) - std::cos(g.beta));
}

}  // namespace

void StrokeGeometry::validate() const {
  if (!(leg_length > 0.0)) {
    throw ValidationError(ValidationError::Kind::kInvalidParameter, "leg length must be positive");
  }
  if (!(period > 0.0)) {
    throw ValidationError(ValidationError::Kind::kInvalidParameter, "period must be positive");
  }
  check_angle(alpha, "alpha");
  check_angle(beta, "beta");
  if (alpha > beta) {
    throw ValidationError(ValidationError::Kind::kInvalidParameter,
                          "alpha must not exceed beta");
  }
}

double sit_advance(const StrokeGeometry& g) { return 0.5 * stroke(g); }

double stand_advance(const StrokeGeometry& g) { return stroke(g); }

double cycle_speed(const StrokeGeometry& g) { return 1.5 * stroke(g) / g.period; }

double invert_beta(double speed, double leg_length, double period, double alpha) {
  const StrokeGeometry bound{leg_length, alpha, kMaxContactAngle, period};
  const double v_max = cycle_speed(bound);
  if (!(speed >= 0.0)) {
    throw ValidationError(ValidationError::Kind::kOutOfBounds, "speed must be non-negative");
  }
  if (speed > v_max * (1.0 + 1e-12)) {
    throw Unreachable(fmt::format("{:.4f} mm/s exceeds the {:.4f} mm/s reachable at 60 deg",
                                  speed * 1e3, v_max * 1e3));
  }
  const double c = std::cos(alpha) - 2.0 * speed * period / (3.0 * leg_length);
  return std::acos(std::clamp(c, std::cos(kMaxContactAngle), 1.0));
}

double standing_height(double leg_length, double beta, double height_offset) {
  check_angle(beta, "beta");
  return leg_length * std::sin(beta) + height_offset;
}

double beta_for_height(double leg_length, double height, double height_offset) {
  const double s = (height - height_offset) / leg_length;
  const double top = std::sin(kMaxContactAngle);
  if (!(s >= -1e-12 && s <= top + 1e-12)) {
    throw ValidationError(ValidationError::Kind::kOutOfBounds,
                          fmt::format("height {:.3f} mm outside the standing range", height * 1e3));
  }
  return std::asin(std::clamp(s, 0.0, top));
}

}  // namespace ccpj::kinematics
