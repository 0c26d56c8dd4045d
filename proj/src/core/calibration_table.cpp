#include "ccpj/core/calibration_table.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace ccpj {

TableCheck validate_table(std::span<const TablePoint> points) {
  using Kind = ValidationError::Kind;
  if (points.size() < 2) {
    return {Kind::kTooFewPoints, points.size(),
            fmt::format("table needs at least 2 points, got {}", points.size())};
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    if (!std::isfinite(p.current) || !std::isfinite(p.value)) {
      return {Kind::kInvalidParameter, i, fmt::format("point {} is not finite", i)};
    }
    if (p.value < 0.0) {
      return {Kind::kNegativeValue, i, fmt::format("point {} has negative value {}", i, p.value)};
    }
    if (i == 0) continue;
    if (!(p.current > points[i - 1].current)) {
      return {Kind::kNonMonotoneCurrent, i,
              fmt::format("current at point {} ({}) does not exceed point {} ({})", i, p.current,
                          i - 1, points[i - 1].current)};
    }
    if (p.value < points[i - 1].value) {
      return {Kind::kNonMonotoneStiffness, i,
              fmt::format("value at point {} ({}) is below point {} ({})", i, p.value, i - 1,
                          points[i - 1].value)};
    }
  }
  return {};
}

CalibrationTable::CalibrationTable(std::vector<TablePoint> points) : points_(std::move(points)) {
  if (auto check = validate_table(points_); !check.ok()) {
    throw ValidationError(*check.failure, check.message, check.index);
  }
}

double CalibrationTable::interpolate(double current) const {
  if (!(current >= min_current() && current <= max_current())) {
    throw OutOfRange(fmt::format("current {} A outside table range [{}, {}] A", current,
                                 min_current(), max_current()));
  }
  auto hi = std::lower_bound(points_.begin(), points_.end(), current,
                             [](const TablePoint& p, double c) { return p.current < c; });
  if (hi->current == current) return hi->value;
  auto lo = hi - 1;
  const double t = (current - lo->current) / (hi->current - lo->current);
  return lo->value + t * (hi->value - lo->value);
}

std::optional<double> CalibrationTable::first_current_reaching(double value) const {
  if (value <= points_.front().value) return points_.front().current;
  for (std::size_t i = 1; i < points_.size(); ++i) {
    const auto& lo = points_[i - 1];
    const auto& hi = points_[i];
    if (hi.value >= value) {
      const double t = (value - lo.value) / (hi.value - lo.value);
      return lo.current + t * (hi.current - lo.current);
    }
  }
  return std::nullopt;
}

// Shipped in data/stiffness_current.csv as well; the two must stay in sync
// (checked by the calibration tests).
CalibrationTable default_stiffness_table() {
  return CalibrationTable({{0.00, 1.1},
                           {0.05, 1.3},
                           {0.10, 1.6},
                           {0.15, 2.2},
                           {0.20, 3.4},
                           {0.25, 5.8},
                           {0.30, 13.0},
                           {0.35, 33.0},
                           {0.40, 59.1}});
}

CalibrationTable default_posture_table() {
  return CalibrationTable({{0.28, mm(30.0)}, {0.38, mm(40.0)}, {0.40, mm(63.5)}});
}

}  // namespace ccpj
