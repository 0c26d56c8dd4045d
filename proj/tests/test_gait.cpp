#include <cmath>

#include <gtest/gtest.h>

#include "ccpj/gait/sim.hpp"
#include "ccpj/gait/statics.hpp"
#include "ccpj/io/config.hpp"
#include "ccpj/kinematics/stroke.hpp"
#include "gen.hpp"

namespace ccpj::gait {
namespace {

Scenario shipped(const std::string& name) {
  return io::load_config(testing::source_dir() / "configs/scenarios" / (name + ".scenario"))
      .scenario;
}

double net_distance(const SimTrace& t) { return t.records.back().x_body - t.records.front().x_body; }

std::size_t index_at(const SimTrace& t, double time) {
  return static_cast<std::size_t>(std::llround(time / t.dt));
}

TEST(Actuator, ExactFirstOrderUpdate) {
  ActuatorModel a;
  testing::Gen gen(401);
  for (int k = 0; k < 1000; ++k) {
    const double temp = gen.uniform(0.0, 1.0), dt = gen.uniform(1e-4, 2.0);
    EXPECT_NEAR(a.advance(temp, true, dt), 1.0 - (1.0 - temp) * std::exp(-dt / a.tau_heat), 1e-15);
    EXPECT_NEAR(a.advance(temp, false, dt), temp * std::exp(-dt / a.tau_cool), 1e-15);
    const double act = a.activation(gen.uniform(-0.5, 1.5));
    EXPECT_GE(act, 0.0);
    EXPECT_LE(act, 1.0);
  }
  // Two half steps equal one full step.
  EXPECT_NEAR(a.advance(a.advance(0.2, true, 0.3), true, 0.3), a.advance(0.2, true, 0.6), 1e-15);
}

TEST(Actuator, SteadyStateAfterTenTimeConstants) {
  Scenario s;
  s.signal.duty = 0.99;
  s.signal.period = 20.0 * s.actuator.tau_heat;
  s.dt = s.signal.period / 1000.0;
  s.duration = s.signal.period * 1.01;
  const auto tr = run(s);
  const auto& r = tr.records.at(index_at(tr, 10.0 * s.actuator.tau_heat));
  EXPECT_NEAR(r.activation[0], 1.0, 1e-6);
  EXPECT_NEAR(r.activation[1], 1.0, 1e-6);
  for (const auto& rec : tr.records) {
    for (double a : rec.activation) {
      EXPECT_GE(a, 0.0);
      EXPECT_LE(a, 1.0);
    }
  }
}

TEST(Sim, PerfectAnchoringReproducesTheStrokeModel) {
  Scenario s;  // smooth, flat, infinite backward friction
  s.signal.period = 8.0;
  s.duration = 80.0;
  s.dt = 0.01;
  const auto tr = run(s);
  const auto [lo, hi] = front_angle_range(tr);
  const double per_cycle =
      kinematics::cycle_speed({s.robot.leg.leg_length, lo, hi, s.signal.period}) * s.signal.period;
  for (int c = 0; c < 10; ++c) {
    const double dx = tr.records[index_at(tr, 8.0 * (c + 1))].x_body -
                      tr.records[index_at(tr, 8.0 * c)].x_body;
    EXPECT_NEAR(dx, per_cycle, 1e-12) << "cycle " << c;
  }
}

TEST(Sim, ZeroSignalStaysPut) {
  Scenario s = shipped("flat_ratchet_T4");
  s.signal.i_high = Current(0.0);
  const auto tr = run(s);
  for (const auto& r : tr.records) EXPECT_EQ(r.x_body, tr.records.front().x_body);
}

TEST(Sim, TimeStepConvergence) {
  for (const char* name : {"flat_ratchet_T4", "slope15", "payload5g"}) {
    Scenario s = shipped(name);
    const double coarse = net_distance(run(s));
    s.dt /= 2;
    const double fine = net_distance(run(s));
    EXPECT_LT(std::abs(fine - coarse), 0.005 * std::abs(fine)) << name;
  }
}

TEST(Sim, DeterministicForSeed) {
  Scenario s = shipped("flat_ratchet_T4");
  EXPECT_EQ(run(s), run(s));
  s.slip.noise_sd = 0.05;
  s.seed = 7;
  const auto a = run(s);
  EXPECT_EQ(a, run(s));
  s.seed = 8;
  EXPECT_NE(a, run(s));
}

TEST(Sim, TimestampsStrictlyIncrease) {
  const auto tr = run(shipped("flat_ratchet_T4"));
  for (std::size_t i = 1; i < tr.records.size(); ++i) {
    EXPECT_GT(tr.records[i].t, tr.records[i - 1].t);
  }
}

TEST(Sim, RatchetWithInfiniteGripAdvancesWholeTeeth) {
  Scenario s = shipped("flat_ratchet_T4");
  s.terrain.mu_backward = std::numeric_limits<double>::infinity();
  s.duration = 40.0;
  const auto tr = run(s);
  const double pitch = s.terrain.pitch;
  for (int c = 0; c < 10; ++c) {
    const auto& a = tr.records[index_at(tr, 4.0 * c)];
    const auto& b = tr.records[index_at(tr, 4.0 * (c + 1))];
    EXPECT_GE(b.x_body, a.x_body);
    const double teeth = (b.x_body - a.x_body) / pitch;
    EXPECT_NEAR(teeth, std::round(teeth), 1e-9) << "cycle " << c;
  }
  for (std::size_t i = 1; i < tr.records.size(); ++i) {
    EXPECT_GE(tr.records[i].x_body, tr.records[i - 1].x_body);
  }
}

TEST(Sim, SpeedNeverBeatsTheAnalyticBound) {
  testing::Gen gen(402);
  const Scenario base = shipped("flat_ratchet_T4");
  for (int k = 0; k < 40; ++k) {
    Scenario s = base;
    s.signal.period = gen.uniform(1.0, 12.0);
    s.dt = s.signal.period / 200.0;
    s.duration = 4.0 * s.signal.period;
    s.terrain.slope = deg_to_rad(gen.uniform(0.0, 15.0));
    s.payload_mass = grams(gen.uniform(0.0, 5.0));
    if (gen.coin()) s.terrain.surface = Surface::kSmooth;
    if (gen.coin()) s.terrain.mu_backward = std::numeric_limits<double>::infinity();
    const auto tr = run(s);
    const auto [lo, hi] = front_angle_range(tr);
    const double bound =
        kinematics::cycle_speed({s.robot.leg.leg_length, lo, hi, s.signal.period});
    EXPECT_LE(average_speed(tr), bound * (1 + 1e-12)) << "case " << k;
  }
}

TEST(Sim, MonotoneInSlopeAndPayload) {
  const Scenario base = shipped("flat_ratchet_T4");
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 10; ++k) {
    Scenario s = base;
    s.terrain.slope = deg_to_rad(1.5 * k);
    const double v = speed_at_period(s, 4.0);
    EXPECT_LE(v, prev) << 1.5 * k << " deg";
    prev = v;
  }
  prev = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 10; ++k) {
    Scenario s = base;
    s.payload_mass = grams(0.5 * k);
    const double v = speed_at_period(s, 4.0);
    EXPECT_LE(v, prev) << 0.5 * k << " g";
    prev = v;
  }
}

TEST(Sim, SweepShapeMatchesMeasuredTrend) {
  const Scenario s = shipped("flat_ratchet_T4");
  const auto pts = sweep_period(s, {1.0, 2.0, 4.0, 6.0, 10.0});
  EXPECT_LT(pts[0].speed, 0.2 * pts[2].speed);
  EXPECT_LT(pts[4].speed, pts[2].speed);
  EXPECT_GT(pts[2].speed, pts[1].speed);
  EXPECT_THROW(speed_at_period(s, 0.4), ValidationError);
  EXPECT_THROW(speed_at_period(s, 21.0), ValidationError);
}

TEST(Confinement, HeightStaysUnderGap) {
  for (const char* name : {"gate40", "gate20"}) {
    const Scenario s = shipped(name);
    const auto rep = navigate_confined(s);
    const double gap = *tightest_confinement(s.terrain).first;
    bool seen = false;
    for (const auto& r : rep.trace.records) {
      if (!r.confined) continue;
      seen = true;
      EXPECT_LE(r.height, gap + 1e-12) << name << " t=" << r.t;
    }
    EXPECT_TRUE(seen) << name;
    EXPECT_GT(net_distance(rep.trace), 150e-3) << name << " must clear the segment";
  }
}

TEST(Confinement, FortyMillimetreGateKeepsAllLegs) {
  const auto rep = navigate_confined(shipped("gate40"));
  EXPECT_TRUE(rep.all_legs_feasible);
  EXPECT_EQ(rep.mask, LegMask::kAllLegs);
  ASSERT_TRUE(rep.confined_current);
  EXPECT_LE(*rep.confined_current, 0.38 + 1e-12);
  EXPECT_GE(*rep.confined_current, 0.35);
}

TEST(Confinement, TwentyMillimetreGateNeedsFrontOnly) {
  const auto rep = navigate_confined(shipped("gate20"));
  EXPECT_FALSE(rep.all_legs_feasible);
  EXPECT_TRUE(rep.front_only_feasible);
  EXPECT_EQ(rep.mask, LegMask::kFrontOnly);
}

TEST(Confinement, ForcedAllLegsInTunnelFailsWithTime) {
  const Scenario s = shipped("tunnel_40x20");
  try {
    navigate_confined(s);
    FAIL() << "expected InfeasibleConfinement";
  } catch (const InfeasibleConfinement& e) {
    EXPECT_GT(e.time(), 0.0);
    EXPECT_LT(e.time(), s.duration);
  }
  EXPECT_THROW(run(s), InfeasibleConfinement);
}

TEST(Confinement, BelowSoftHeightIsInfeasibleForEveryMask) {
  Scenario s = shipped("gate20");
  s.terrain.confinement[0].gap = 5e-3;
  for (LegMask m : {LegMask::kAllLegs, LegMask::kFrontOnly}) {
    s.confined_control = ConfinedControl{m, std::nullopt};
    EXPECT_THROW(run(s), InfeasibleConfinement);
  }
}

TEST(Confinement, HighCeilingIsInactive) {
  Scenario open = shipped("flat_ratchet_T4");
  Scenario roofed = open;
  roofed.terrain.confinement.push_back({50e-3, 150e-3, 63.5e-3, std::nullopt});
  const auto a = run(open);
  const auto b = navigate_confined(roofed).trace;
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].x_body, b.records[i].x_body);
    EXPECT_EQ(a.records[i].beta, b.records[i].beta);
    EXPECT_EQ(a.records[i].height, b.records[i].height);
  }
}

TEST(Confinement, MaxFeasibleCurrentMonotoneInGap) {
  const Scenario s;
  std::optional<double> prev;
  for (int k = 0; k <= 60; ++k) {
    const double gap = 20e-3 + 0.75e-3 * k;
    const auto i = max_feasible_current(gap, std::nullopt, LegMask::kAllLegs, s.robot, s.posture,
                                        s.actuator);
    if (prev) {
      ASSERT_TRUE(i.has_value()) << gap;
      EXPECT_GE(*i, *prev);
    }
    if (i) prev = i;
  }
  EXPECT_EQ(prev, 0.4);
}

TEST(StaticLoad, Examples) {
  const RobotParams r;
  const auto table = default_stiffness_table();
  EXPECT_TRUE(static_load_check(0.4, grams(10), r, table).stands);
  EXPECT_FALSE(static_load_check(0.0, grams(0.1), r, table).stands);
  EXPECT_FALSE(static_load_check(0.4, grams(150), r, table).stands);
}

TEST(StaticLoad, SagGrowsWithLoad) {
  const RobotParams r;
  const auto table = default_stiffness_table();
  double prev = -1.0;
  for (double g : {0.0, 2.0, 5.0, 10.0, 20.0, 40.0}) {
    const auto res = static_load_check(0.4, grams(g), r, table);
    EXPECT_GT(res.sag, prev) << g << " g";
    prev = res.sag;
  }
}

}  // namespace
}  // namespace ccpj::gait
