#include <cmath>

#include <gtest/gtest.h>

#include "ccpj/gait/sim.hpp"
#include "ccpj/io/config.hpp"
#include "ccpj/optimizer/search.hpp"
#include "gen.hpp"

namespace ccpj::optimizer {
namespace {

gait::Scenario shipped(const std::string& name) {
  return io::load_config(testing::source_dir() / "configs/scenarios" / (name + ".scenario"))
      .scenario;
}

gait::Scenario with_gap(double gap_mm) {
  gait::Scenario s = shipped("gate40");
  s.terrain.confinement[0].gap = mm(gap_mm);
  s.duration = 300.0;
  return s;
}

TEST(SearchSpec, RejectsDegenerateBounds) {
  SearchSpec s;
  s.upper = s.lower;
  EXPECT_THROW(s.validate(), ValidationError);
  s = {};
  s.tolerance = 0.0;
  EXPECT_THROW(s.validate(), ValidationError);
  s = {};
  s.smoothing_points = 1;
  EXPECT_THROW(s.validate(), ValidationError);
  EXPECT_NO_THROW(SearchSpec{}.validate());
}

TEST(GoldenSection, PlantedPeak) {
  const auto m = maximize_unimodal([](double x) { return -std::pow(x - 5.0, 2); }, 2.0, 10.0,
                                   0.01, 1e-9);
  EXPECT_NEAR(m.x, 5.0, 0.01);
  EXPECT_EQ(m.coarse_x.size(), 5u);
}

TEST(GoldenSection, MatchesBruteForceOnRandomUnimodalFunctions) {
  testing::Gen gen(601);
  for (int k = 0; k < 300; ++k) {
    const double lo = gen.uniform(-5, 5), hi = lo + gen.uniform(1, 10);
    const double peak = gen.uniform(lo, hi), p = gen.uniform(0.5, 3.0), skew = gen.uniform(0.3, 3);
    auto f = [&](double x) {
      const double d = x - peak;
      return -std::pow(std::abs(d), p) * (d < 0 ? skew : 1.0);
    };
    const double tol = 1e-3 * (hi - lo);
    const auto m = maximize_unimodal(f, lo, hi, tol, 1e-12);
    double best = -INFINITY, arg = lo;
    for (int i = 0; i <= 20000; ++i) {
      const double x = lo + (hi - lo) * i / 20000.0;
      if (f(x) > best) best = f(x), arg = x;
    }
    EXPECT_NEAR(m.x, arg, tol + (hi - lo) / 20000.0) << "case " << k;
    EXPECT_GE(m.value, best - std::max(1e-9, std::abs(f(arg + tol) - best)));
  }
}

TEST(GoldenSection, MonotoneObjectivePicksTheBound) {
  const auto m = maximize_unimodal([](double x) { return x; }, 0.0, 1.0, 1e-4, 1e-9);
  EXPECT_NEAR(m.x, 1.0, 1e-4);
}

TEST(GoldenSection, TwoSeparatedPeaksAreRejected) {
  auto f = [](double x) { return std::exp(-std::pow(x - 4, 2)) + std::exp(-std::pow(x - 8, 2)); };
  // Coarse samples at 2, 4, 6, 8, 10 see peaks at 4 and 8 with a dip at 6.
  EXPECT_THROW(maximize_unimodal(f, 2.0, 10.0, 0.01, 1e-3), NotUnimodal);
}

TEST(OptimizePeriod, ShippedScenarioPeaksNearFourSeconds) {
  const auto s = shipped("flat_ratchet_T4");
  SearchSpec spec;
  const auto r = optimize_period(spec, s);
  EXPECT_GE(r.period, 3.5);
  EXPECT_LE(r.period, 4.5);
  EXPECT_DOUBLE_EQ(r.speed, gait::speed_at_period(s, r.period));

  // Exhaustive 0.1 s sweep of the same smoothed objective.
  auto smoothed = [&](double T) {
    double acc = 0;
    for (int j = 0; j < spec.smoothing_points; ++j) {
      const double a = std::max(0.5, T - spec.smoothing), b = std::min(20.0, T + spec.smoothing);
      acc += gait::speed_at_period(s, a + (b - a) * j / (spec.smoothing_points - 1));
    }
    return acc / spec.smoothing_points;
  };
  double best = 0;
  for (int k = 0; k <= 80; ++k) best = std::max(best, smoothed(2.0 + 0.1 * k));
  EXPECT_GE(r.smoothed_speed, best - 1e-12);
}

TEST(OptimizePeriod, ZeroDriveGivesZeroSpeed) {
  auto s = shipped("flat_ratchet_T4");
  s.signal.i_high = Current(0.0);
  const auto r = optimize_period(SearchSpec{}, s);
  EXPECT_GE(r.period, 2.0);
  EXPECT_LE(r.period, 10.0);
  EXPECT_EQ(r.speed, 0.0);
}

TEST(FeasibleCurrent, Gaps) {
  const gait::Scenario s;
  const auto g40 = max_feasible_current(40e-3, s.robot, s.posture, s.actuator);
  ASSERT_TRUE(g40.current);
  EXPECT_LE(*g40.current, 0.38 + 1e-12);
  EXPECT_NEAR(*g40.current, 0.38, 0.03);

  const auto open = max_feasible_current(63.5e-3, s.robot, s.posture, s.actuator);
  ASSERT_TRUE(open.current);
  EXPECT_DOUBLE_EQ(*open.current, 0.4);

  const auto g20 = max_feasible_current(20e-3, s.robot, s.posture, s.actuator);
  EXPECT_FALSE(g20.current);
  EXPECT_EQ(g20.recommended_mask, LegMask::kFrontOnly);
  EXPECT_FALSE(g20.note.empty());
}

TEST(FeasibleCurrent, MonotoneInGap) {
  const gait::Scenario s;
  double prev = 0.0;
  for (int k = 0; k <= 100; ++k) {
    const auto a = max_feasible_current(15e-3 + 0.5e-3 * k, s.robot, s.posture, s.actuator);
    const double i = a.current.value_or(0.0);
    EXPECT_GE(i, prev);
    prev = i;
  }
}

TEST(SelectMask, PicksFeasibleMaskAndRechecks) {
  for (auto [gap, expect] : {std::pair{40.0, LegMask::kAllLegs}, {20.0, LegMask::kFrontOnly}}) {
    const auto s = with_gap(gap);
    const auto choice = select_mask(s);
    EXPECT_EQ(choice.mask, expect) << gap << " mm";
    EXPECT_TRUE(std::isfinite(choice.transit_time)) << gap << " mm";
    gait::Scenario forced = s;
    forced.confined_control = gait::ConfinedControl{choice.mask, std::nullopt};
    EXPECT_NO_THROW(gait::navigate_confined(forced));
    EXPECT_DOUBLE_EQ(transit_time(s, choice.mask), choice.transit_time);
  }
}

TEST(SelectMask, FiveMillimetreGapDefeatsEveryMask) {
  try {
    select_mask(with_gap(5.0));
    FAIL() << "expected AllMasksInfeasible";
  } catch (const AllMasksInfeasible& e) {
    EXPECT_NE(std::string(e.what()).find("front only"), std::string::npos);
  }
}

}  // namespace
}  // namespace ccpj::optimizer
