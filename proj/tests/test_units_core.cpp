#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "ccpj/core/calibration_table.hpp"
#include "ccpj/core/params.hpp"
#include "ccpj/core/units.hpp"
#include "gen.hpp"

namespace ccpj {
namespace {

using Kind = ValidationError::Kind;

TEST(Defaults, BeamParamsMatchPublishedValues) {
  const BeamParams p;
  EXPECT_EQ(p.n_beads, 20);
  EXPECT_DOUBLE_EQ(p.bead_thickness, 3e-3);
  EXPECT_DOUBLE_EQ(p.slack, 1.6e-3);
  EXPECT_DOUBLE_EQ(p.leg_length, 65e-3);
  EXPECT_DOUBLE_EQ(p.beam_mass, 0.46e-3);
  EXPECT_DOUBLE_EQ(p.span_3pb, 40e-3);
  EXPECT_NO_THROW(p.validate());
}

TEST(Defaults, RobotParamsMatchPublishedValues) {
  const RobotParams r;
  EXPECT_EQ(r.n_legs, 3);
  EXPECT_DOUBLE_EQ(rad_to_deg(r.leg_tilt_deploy), 60.0);
  EXPECT_DOUBLE_EQ(r.total_mass, 2.1e-3);
  EXPECT_NEAR(r.body_mass(), 0.72e-3, 1e-15);
  EXPECT_DOUBLE_EQ(r.freestanding_height, 63.5e-3);
  EXPECT_DOUBLE_EQ(r.deployed_width, 66e-3);
  EXPECT_EQ(r.compact_box, (Box3{15e-3, 17e-3, 73e-3}));
  EXPECT_EQ(r.deployed_box, (Box3{105e-3, 120e-3, 64e-3}));
  // 63.5 - 65 sin 60
  EXPECT_NEAR(r.height_offset(), 7.2083e-3, 1e-7);
  EXPECT_NO_THROW(r.validate());
}

TEST(Defaults, GaitSignalIsHalfDutySquareWave) {
  const GaitSignal s;
  EXPECT_DOUBLE_EQ(s.duty, 0.5);
  EXPECT_DOUBLE_EQ(s.i_high.amps(), 0.4);
  EXPECT_DOUBLE_EQ(s.i_low.amps(), 0.0);
  EXPECT_EQ(s.kLegsPerGroup[0] + s.kLegsPerGroup[1], 3);
  EXPECT_DOUBLE_EQ(s.current_at(LegGroup::kFront, 1.0), 0.4);
  EXPECT_DOUBLE_EQ(s.current_at(LegGroup::kFront, 3.0), 0.0);
  EXPECT_DOUBLE_EQ(s.current_at(LegGroup::kRear, 4.5), 0.4);
}

TEST(Defaults, StiffnessTableEndpoints) {
  const auto t = default_stiffness_table();
  EXPECT_EQ(t.points().size(), 9u);
  EXPECT_DOUBLE_EQ(t.interpolate(0.0), 1.1);
  EXPECT_DOUBLE_EQ(t.interpolate(0.4), 59.1);
}

TEST(GaitSignal, RejectsBadDutyAndPhase) {
  GaitSignal s;
  s.duty = 1.0;
  EXPECT_THROW(s.validate(), ValidationError);
  s.duty = 0.5;
  s.phase = {0.0, 1.0};
  EXPECT_THROW(s.validate(), ValidationError);
  s.phase = {0.0, 0.5};
  s.i_low = Current(0.3);
  s.i_high = Current(0.2);
  EXPECT_THROW(s.validate(), ValidationError);
}

TEST(CurrentType, HardCapRejectsRatherThanClamps) {
  EXPECT_NO_THROW(Current(0.5));
  EXPECT_NO_THROW(Current(0.0));
  EXPECT_THROW(Current(0.5000001), ValidationError);
  EXPECT_THROW(Current(-0.01), ValidationError);
  EXPECT_THROW(Current(std::nan("")), ValidationError);
}

TEST(ValidateTable, Examples) {
  const std::vector<TablePoint> ends{{0.0, 1.1}, {0.4, 59.1}};
  EXPECT_TRUE(validate_table(ends).ok());

  const std::vector<TablePoint> one{{0.0, 1.1}};
  auto c = validate_table(one);
  ASSERT_FALSE(c.ok());
  EXPECT_EQ(*c.failure, Kind::kTooFewPoints);

  const std::vector<TablePoint> dip{{0.0, 2.0}, {0.2, 1.0}, {0.4, 59.1}};
  c = validate_table(dip);
  ASSERT_FALSE(c.ok());
  EXPECT_EQ(*c.failure, Kind::kNonMonotoneStiffness);
  EXPECT_EQ(c.index, 1u);

  const std::vector<TablePoint> back{{0.0, 1.0}, {0.2, 2.0}, {0.1, 3.0}};
  c = validate_table(back);
  ASSERT_FALSE(c.ok());
  EXPECT_EQ(*c.failure, Kind::kNonMonotoneCurrent);
  EXPECT_EQ(c.index, 2u);
}

TEST(ValidateTable, ConstructorThrowsWithKindAndIndex) {
  try {
    CalibrationTable t({{0.0, 2.0}, {0.2, 1.0}, {0.4, 59.1}});
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.kind(), Kind::kNonMonotoneStiffness);
    EXPECT_EQ(e.index(), 1u);
  }
}

// Independent statement of the table invariants.
bool table_ok(const std::vector<TablePoint>& p) {
  if (p.size() < 2) return false;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i].value >= 0.0)) return false;
    if (i > 0 && !(p[i].current > p[i - 1].current)) return false;
    if (i > 0 && !(p[i].value >= p[i - 1].value)) return false;
  }
  return true;
}

TEST(ValidateTable, PropertyAcceptsExactlyValidTables) {
  testing::Gen gen(101);
  int accepted = 0, rejected = 0;
  for (int k = 0; k < 5000; ++k) {
    const auto pts = (k % 2 == 0) ? gen.valid_table() : gen.any_table();
    const bool expect = table_ok(pts);
    EXPECT_EQ(validate_table(pts).ok(), expect) << "case " << k;
    (expect ? accepted : rejected)++;
  }
  // Both branches must actually be exercised.
  EXPECT_GT(accepted, 1000);
  EXPECT_GT(rejected, 1000);
}

TEST(CalibrationTable, PropertyExactAtKnotsAndMonotone) {
  testing::Gen gen(102);
  for (int k = 0; k < 500; ++k) {
    const CalibrationTable t(gen.valid_table());
    for (const auto& p : t.points()) EXPECT_EQ(t.interpolate(p.current), p.value);
    double prev = -1.0;
    for (int i = 0; i <= 50; ++i) {
      const double c = t.min_current() + (t.max_current() - t.min_current()) * i / 50.0;
      const double v = t.interpolate(std::min(c, t.max_current()));
      EXPECT_GE(v, prev);
      prev = v;
    }
    EXPECT_THROW(t.interpolate(t.max_current() + 1e-6), OutOfRange);
    EXPECT_THROW(t.interpolate(t.min_current() - 1e-6), OutOfRange);
  }
}

TEST(CompactionRatio, DefaultBoxes) {
  // 806400 / 18615 mm^3
  EXPECT_NEAR(compaction_ratio(RobotParams{}), 43.3, 0.1);
  EXPECT_NEAR(compaction_ratio(RobotParams{}), 806400.0 / 18615.0, 1e-9);
}

TEST(CompactionRatio, TrivialBoxes) {
  RobotParams r;
  r.deployed_box = r.compact_box;
  EXPECT_DOUBLE_EQ(compaction_ratio(r), 1.0);
  r.compact_box = {1.0, 1.0, 1.0};
  r.deployed_box = {2.0, 2.0, 2.0};
  EXPECT_DOUBLE_EQ(compaction_ratio(r), 8.0);
}

TEST(CompactionRatio, ZeroDimension) {
  RobotParams r;
  r.compact_box.y = 0.0;
  try {
    compaction_ratio(r);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.kind(), Kind::kZeroDimension);
  }
}

TEST(CompactionRatio, PropertyInvariantUnderAxisPermutation) {
  testing::Gen gen(103);
  for (int k = 0; k < 1000; ++k) {
    RobotParams r;
    std::array<double, 3> c{gen.uniform(1e-3, 1), gen.uniform(1e-3, 1), gen.uniform(1e-3, 1)};
    std::array<double, 3> d{gen.uniform(1e-3, 1), gen.uniform(1e-3, 1), gen.uniform(1e-3, 1)};
    r.compact_box = {c[0], c[1], c[2]};
    r.deployed_box = {d[0], d[1], d[2]};
    const double base = compaction_ratio(r);
    std::sort(c.begin(), c.end());
    std::sort(d.begin(), d.end());
    do {
      r.compact_box = {c[0], c[1], c[2]};
      r.deployed_box = {d[2], d[0], d[1]};
      EXPECT_NEAR(compaction_ratio(r), base, 1e-12 * base);
    } while (std::next_permutation(c.begin(), c.end()));
  }
}

TEST(WeightBearing, Examples) {
  const RobotParams r;
  EXPECT_NEAR(weight_bearing_ratio(19.8, r), 9428.6, 0.05);
  EXPECT_EQ(std::lround(weight_bearing_ratio(19.8, r)), 9429);
  EXPECT_DOUBLE_EQ(weight_bearing_ratio(2.1e-3, r), 1.0);
  EXPECT_NEAR(weight_bearing_ratio(5e-3, r), 2.38, 0.005);
  EXPECT_THROW(weight_bearing_ratio(0.0, r), ValidationError);
}

TEST(LegMask, ParseAndFlags) {
  EXPECT_EQ(parse_leg_mask("all"), LegMask::kAllLegs);
  EXPECT_EQ(parse_leg_mask("front_only"), LegMask::kFrontOnly);
  EXPECT_FALSE(parse_leg_mask("rear").has_value());
  EXPECT_EQ(to_enable_flags(LegMask::kFrontOnly), (std::array<bool, 2>{true, false}));
  EXPECT_STREQ(to_string(LegMask::kAllLegs), "all");
}

}  // namespace
}  // namespace ccpj
