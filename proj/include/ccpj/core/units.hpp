#pragma once

#include <numbers>

#include "ccpj/core/error.hpp"

namespace ccpj {

inline constexpr double kGravity = 9.81;  // m/s^2

constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }
constexpr double mm(double v) { return v * 1e-3; }
constexpr double grams(double v) { return v * 1e-3; }

/// SMA drive current in amperes. Inputs above the hard cap are rejected, never clamped.
class Current {
 public:
  static constexpr double kMaxAmps = 0.5;

  constexpr Current() = default;
  explicit Current(double amps) : amps_(amps) {
    if (!(amps >= 0.0) || amps > kMaxAmps) {
      throw ValidationError(ValidationError::Kind::kOutOfBounds,
                            "current must lie in [0, 0.5] A, got " + std::to_string(amps));
    }
  }

  constexpr double amps() const { return amps_; }
  friend constexpr auto operator<=>(Current, Current) = default;

 private:
  double amps_ = 0.0;
};

}  // namespace ccpj
