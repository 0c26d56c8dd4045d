#include "ccpj/core/params.hpp"

#include <cmath>

#include <fmt/format.h>

namespace ccpj {

namespace {

void require(bool condition, const std::string& message,
             ValidationError::Kind kind = ValidationError::Kind::kInvalidParameter) {
  if (!condition) throw ValidationError(kind, message);
}

}  // namespace

void BeamParams::validate() const {
  require(n_beads >= 2, fmt::format("n_beads must be >= 2, got {}", n_beads));
  require(bead_thickness > 0.0, "bead_thickness must be positive");
  require(slack >= 0.0, "slack must be non-negative");
  require(beam_mass > 0.0, "beam_mass must be positive");
  require(span_3pb > 0.0 && span_3pb < chain_length(),
          "span_3pb must be positive and shorter than the bead chain");
  const double stacked = chain_length() + slack;
  require(std::abs(leg_length - stacked) <= 0.1 * stacked,
          fmt::format("leg_length {} m differs from beads + slack ({} m) by more than 10%",
                      leg_length, stacked));
}

double RobotParams::height_offset() const {
  return freestanding_height - leg.leg_length * std::sin(leg_tilt_deploy);
}

double RobotParams::body_width() const {
  // Rear legs sit at +-120 deg azimuth from the heading.
  return deployed_width -
         2.0 * leg.leg_length * std::cos(leg_tilt_deploy) * std::sin(deg_to_rad(60.0));
}

void RobotParams::validate() const {
  leg.validate();
  require(n_legs == 3, fmt::format("the tripod has exactly 3 legs, got {}", n_legs));
  require(leg_tilt_deploy > 0.0 && leg_tilt_deploy <= deg_to_rad(60.0) + 1e-12,
          "leg_tilt_deploy must lie in (0, 60] deg");
  require(body_mass() > 0.0, fmt::format("total_mass {} kg leaves no mass for the body",
                                         total_mass));
  require(freestanding_height > 0.0 && height_offset() >= 0.0,
          "freestanding_height must be at least the leg rise");
  require(body_width() > 0.0, "deployed_width is narrower than the splayed rear legs");
}

double compaction_ratio(const RobotParams& params) {
  for (const Box3* box : {&params.compact_box, &params.deployed_box}) {
    if (!(box->x > 0.0 && box->y > 0.0 && box->z > 0.0)) {
      throw ValidationError(ValidationError::Kind::kZeroDimension,
                            "bounding boxes need positive dimensions");
    }
  }
  return params.deployed_box.volume() / params.compact_box.volume();
}

double weight_bearing_ratio(double load_mass, const RobotParams& params) {
  if (!(load_mass > 0.0)) {
    throw ValidationError(ValidationError::Kind::kOutOfBounds, "load_mass must be positive");
  }
  return load_mass / params.total_mass;
}

double GaitSignal::current_at(LegGroup group, double t) const {
  const auto g = static_cast<std::size_t>(group);
  if (!mask[g]) return i_low.amps();
  double cycle = t / period - phase[g];
  cycle -= std::floor(cycle);
  return cycle < duty ? i_high.amps() : i_low.amps();
}

void GaitSignal::validate() const {
  require(period > 0.0, "period must be positive");
  require(duty > 0.0 && duty < 1.0, "duty must lie strictly between 0 and 1");
  // Equal levels are a legal "no actuation" signal.
  require(i_low <= i_high, "i_low must not exceed i_high");
  for (double p : phase) require(p >= 0.0 && p < 1.0, "phase offsets must lie in [0, 1)");
  require(kLegsPerGroup[0] + kLegsPerGroup[1] == 3, "leg groups must cover 3 legs");
}

std::array<bool, kGroupCount> to_enable_flags(LegMask mask) {
  return mask == LegMask::kAllLegs ? std::array<bool, kGroupCount>{true, true}
                                   : std::array<bool, kGroupCount>{true, false};
}

const char* to_string(LegMask mask) {
  return mask == LegMask::kAllLegs ? "all" : "front_only";
}

std::optional<LegMask> parse_leg_mask(std::string_view text) {
  if (text == "all" || text == "all_legs") return LegMask::kAllLegs;
  if (text == "front_only" || text == "front") return LegMask::kFrontOnly;
  return std::nullopt;
}

}  // namespace ccpj
