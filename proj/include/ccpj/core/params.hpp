#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "ccpj/core/units.hpp"

namespace ccpj {

/// Axis-aligned bounding box, metres.
struct Box3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double volume() const { return x * y * z; }
  friend bool operator==(const Box3&, const Box3&) = default;
};

/// Geometry and mass of one bead-chain leg. SI units throughout.
struct BeamParams {
  int n_beads = 20;
  double bead_thickness = 3e-3;
  double slack = 1.6e-3;
  double leg_length = 65e-3;
  double beam_mass = 0.46e-3;
  double span_3pb = 40e-3;

  /// Length of the bead stack, n_beads * bead_thickness.
  double chain_length() const { return n_beads * bead_thickness; }
  double bead_mass() const { return beam_mass / n_beads; }

  /// Throws ValidationError on violated invariants.
  void validate() const;

  friend bool operator==(const BeamParams&, const BeamParams&) = default;
};

struct RobotParams {
  BeamParams leg;
  int n_legs = 3;
  double leg_tilt_deploy = deg_to_rad(60.0);
  double total_mass = 2.1e-3;
  double freestanding_height = 63.5e-3;
  double deployed_width = 66e-3;
  Box3 compact_box{15e-3, 17e-3, 73e-3};
  Box3 deployed_box{105e-3, 120e-3, 64e-3};

  /// Body mass is whatever the legs do not account for.
  double body_mass() const { return total_mass - n_legs * leg.beam_mass; }

  /// Vertical extent of the body above the leg hips, chosen so that fully
  /// tilted legs reproduce the freestanding height.
  double height_offset() const;

  /// Lateral extent of the body core, net of the two splayed rear legs.
  double body_width() const;

  void validate() const;

  friend bool operator==(const RobotParams&, const RobotParams&) = default;
};

/// Deployed volume over stowed volume. Throws ValidationError (kZeroDimension)
/// when either box has a non-positive side.
double compaction_ratio(const RobotParams& params);

/// Carried mass in multiples of the robot's own mass.
double weight_bearing_ratio(double load_mass, const RobotParams& params);

enum class LegGroup { kFront = 0, kRear = 1 };
inline constexpr int kGroupCount = 2;

/// Square-wave drive. Legs are partitioned into the front leg and the rear pair.
struct GaitSignal {
  double period = 4.0;  // s
  double duty = 0.5;
  Current i_high{0.4};
  Current i_low{0.0};
  std::array<bool, kGroupCount> mask{true, true};
  std::array<double, kGroupCount> phase{0.0, 0.0};

  /// Legs per group; the partition must cover the three legs exactly.
  static constexpr std::array<int, kGroupCount> kLegsPerGroup{1, 2};

  /// Commanded current of `group` at time `t`.
  double current_at(LegGroup group, double t) const;

  void validate() const;
};

/// Which leg groups are driven.
enum class LegMask { kAllLegs, kFrontOnly };

std::array<bool, kGroupCount> to_enable_flags(LegMask mask);
const char* to_string(LegMask mask);
std::optional<LegMask> parse_leg_mask(std::string_view text);

}  // namespace ccpj
