#include "ccpj/gait/model.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "ccpj/kinematics/stroke.hpp"

namespace ccpj::gait {

namespace {

void require(bool condition, const std::string& message) {
  if (!condition) throw ValidationError(ValidationError::Kind::kInvalidParameter, message);
}

constexpr double kCurrentStep = 0.005;

}  // namespace

void ActuatorModel::validate() const {
  require(tau_heat > 0.0 && tau_cool > 0.0, "thermal time constants must be positive");
  require(i_threshold >= 0.0, "activation threshold must be non-negative");
  require(band_start >= 0.0 && band_start < band_finish && band_finish <= 1.0,
          "transformation band must satisfy 0 <= start < finish <= 1");
}

double ActuatorModel::advance(double temperature, bool heating, double dt) const {
  const double target = heating ? 1.0 : 0.0;
  const double tau = target > temperature ? tau_heat : tau_cool;
  return target + (temperature - target) * std::exp(-dt / tau);
}

double ActuatorModel::activation(double temperature) const {
  return std::clamp((temperature - band_start) / (band_finish - band_start), 0.0, 1.0);
}

double SlipModel::efficiency(double slope, double payload_ratio, bool front_only) const {
  const double base = front_only ? eta_front_only : eta0;
  return std::clamp(base - c_slope * std::sin(slope) - c_load * payload_ratio, 0.0, 1.0);
}

void SlipModel::validate() const {
  require(std::isfinite(eta0) && std::isfinite(c_slope) && std::isfinite(c_load),
          "slip coefficients must be finite");
  require(eta_front_only >= 0.0 && eta_front_only <= 1.0, "eta_front_only must lie in [0, 1]");
  require(noise_sd >= 0.0, "slip noise must be non-negative");
}

void Terrain::validate() const {
  require(std::abs(slope) < deg_to_rad(90.0), "slope must lie within (-90, 90) deg");
  if (surface == Surface::kRatchet) {
    require(pitch > 0.0, "ratchet pitch must be positive");
    require(tooth_height >= 0.0, "ratchet tooth height must be non-negative");
  }
  require(mu_forward >= 0.0 && mu_forward <= mu_backward,
          "friction must satisfy 0 <= mu_forward <= mu_backward");
  for (const auto& seg : confinement) {
    require(seg.x_begin <= seg.x_end, "confined segment must have x_begin <= x_end");
    require(!seg.gap || *seg.gap > 0.0, "ceiling gap must be positive");
    require(!seg.width || *seg.width > 0.0, "tunnel width must be positive");
  }
}

void Scenario::validate() const {
  robot.validate();
  terrain.validate();
  signal.validate();
  actuator.validate();
  slip.validate();
  require(payload_mass >= 0.0, "payload must be non-negative");
  require(dt > 0.0 && dt <= signal.period / 100.0 * (1.0 + 1e-12),
          fmt::format("dt {} s exceeds period/100 = {} s", dt, signal.period / 100.0));
  require(duration > signal.period, "duration must exceed one period");
  if (confined_control && confined_control->i_high) {
    [[maybe_unused]] const Current checked{*confined_control->i_high};
  }
}

double posture_beta(double current, const RobotParams& robot, const CalibrationTable& posture) {
  const double h = posture.interpolate(current);
  const double top = kinematics::standing_height(robot.leg.leg_length, robot.leg_tilt_deploy,
                                                 robot.height_offset());
  return kinematics::beta_for_height(robot.leg.leg_length, std::min(h, top),
                                     robot.height_offset());
}

double posture_min_beta(const RobotParams& robot, const CalibrationTable& posture) {
  return posture_beta(posture.min_current(), robot, posture);
}

double body_height(const RobotParams& robot, double beta_front, double beta_rear) {
  return robot.height_offset() +
         robot.leg.leg_length / 3.0 * (std::sin(beta_front) + 2.0 * std::sin(beta_rear));
}

double rear_width(const RobotParams& robot, double beta_rear) {
  return 2.0 * robot.leg.leg_length * std::cos(beta_rear) * std::sin(deg_to_rad(60.0)) +
         robot.body_width();
}

double rear_cap(const RobotParams& robot, double gap) {
  const double s = (gap - robot.height_offset()) / robot.leg.leg_length;
  return std::min(robot.leg_tilt_deploy, std::asin(std::clamp(s, 0.0, 1.0)));
}

double front_cap(const RobotParams& robot, double gap, double beta_rear) {
  const double s =
      3.0 * (gap - robot.height_offset()) / robot.leg.leg_length - 2.0 * std::sin(beta_rear);
  return std::min(robot.leg_tilt_deploy, std::asin(std::clamp(s, 0.0, 1.0)));
}

std::optional<double> max_feasible_current(double gap, std::optional<double> width, LegMask mask,
                                           const RobotParams& robot,
                                           const CalibrationTable& posture,
                                           const ActuatorModel& actuator) {
  if (!(gap > 0.0)) {
    throw ValidationError(ValidationError::Kind::kOutOfBounds, "gap must be positive");
  }
  const double lo = std::max(actuator.i_threshold, posture.min_current());
  const double hi = posture.max_current();
  if (lo > hi) return std::nullopt;
  const auto flags = to_enable_flags(mask);
  auto fits = [&](double current) {
    const double beta = posture_beta(current, robot, posture);
    const double front = flags[0] ? beta : 0.0;
    const double rear = flags[1] ? beta : 0.0;
    if (body_height(robot, front, rear) > gap * (1.0 + 1e-12)) return false;
    if (width && flags[1] && rear_width(robot, rear) > *width * (1.0 + 1e-12)) return false;
    return true;
  };
  const int steps = static_cast<int>(std::floor((hi - lo) / kCurrentStep + 1e-9));
  auto grid = [&](int k) { return k == steps + 1 ? hi : lo + k * kCurrentStep; };
  // The top of the table is always a candidate even off the grid.
  const int top = (std::abs(grid(steps) - hi) < 1e-12) ? steps : steps + 1;
  if (!fits(grid(0))) return std::nullopt;
  if (fits(grid(top))) return grid(top);
  int good = 0;
  int bad = top;
  while (bad - good > 1) {
    const int mid = (good + bad) / 2;
    (fits(grid(mid)) ? good : bad) = mid;
  }
  return grid(good);
}

}  // namespace ccpj::gait
