#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ccpj/core/error.hpp"
#include "ccpj/core/units.hpp"

namespace ccpj {

struct TablePoint {
  double current;  // A
  double value;    // N/m for stiffness tables, m for posture tables

  friend bool operator==(const TablePoint&, const TablePoint&) = default;
};

/// Outcome of validate_table. `ok()` is true iff no invariant is violated.
struct TableCheck {
  std::optional<ValidationError::Kind> failure;
  std::optional<std::size_t> index;
  std::string message;

  bool ok() const { return !failure.has_value(); }
};

/// Checks the table invariants: at least two points, currents strictly
/// increasing, values non-negative and non-decreasing. The reported index is
/// the first offending point.
TableCheck validate_table(std::span<const TablePoint> points);

/// Monotone current -> value map, interpolated piecewise-linearly.
///
/// Used for the apparent-stiffness calibration (current -> N/m) and for the
/// standing posture (current -> body height). Immutable once built.
class CalibrationTable {
 public:
  /// Throws ValidationError when `validate_table` rejects the points.
  explicit CalibrationTable(std::vector<TablePoint> points);

  const std::vector<TablePoint>& points() const { return points_; }
  double min_current() const { return points_.front().current; }
  double max_current() const { return points_.back().current; }

  /// Exact at knots. Throws OutOfRange outside [min_current, max_current].
  double interpolate(double current) const;
  double interpolate(Current current) const { return interpolate(current.amps()); }

  /// Smallest current whose value reaches `value`; nullopt if the table never does.
  std::optional<double> first_current_reaching(double value) const;

  friend bool operator==(const CalibrationTable&, const CalibrationTable&) = default;

 private:
  std::vector<TablePoint> points_;
};

/// Current -> apparent stiffness (N/m) measured in three-point bending.
/// Knots follow the nine-level characterization between 0 A and 0.4 A.
CalibrationTable default_stiffness_table();

/// Current -> freestanding body height (m) of the deployed tripod.
CalibrationTable default_posture_table();

}  // namespace ccpj
