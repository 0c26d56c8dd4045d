#include "ccpj/gait/statics.hpp"

#include <cmath>

#include "ccpj/beam/beam.hpp"

namespace ccpj::gait {

StaticLoadResult static_load_check(double current, double load, const RobotParams& robot,
                                   const CalibrationTable& stiffness) {
  robot.validate();
  if (!(load >= 0.0)) {
    throw ValidationError(ValidationError::Kind::kOutOfBounds, "load must be non-negative");
  }
  const BeamParams& leg = robot.leg;
  const beam::FlexuralModel flex = beam::flexural_model_at(current, stiffness, leg);

  StaticLoadResult out;
  out.leg_force = (robot.total_mass + load) * kGravity / robot.n_legs;

  beam::Pose hip;
  hip.orientation = -robot.leg_tilt_deploy;
  beam::BeamLoads loads;
  loads.points.push_back({leg.chain_length(), beam::Vec2(0.0, out.leg_force)});
  const auto eq = beam::equilibrium_shape(leg, flex, loads, beam::Support::kClampedGuided, hip);

  const double drop_unloaded = leg.chain_length() * std::sin(robot.leg_tilt_deploy);
  const double drop_loaded = -eq.shape.tip().y();
  out.sag = drop_unloaded - drop_loaded;
  out.height = robot.freestanding_height - out.sag;
  out.stands = std::abs(out.sag) <= 0.1 * robot.freestanding_height;
  return out;
}

}  // namespace ccpj::gait
