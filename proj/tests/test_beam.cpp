#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "ccpj/beam/beam.hpp"
#include "beam_oracle.hpp"
#include "gen.hpp"

namespace ccpj::beam {
namespace {

BeamParams short_leg() {
  BeamParams p;
  p.n_beads = 6;
  p.leg_length = 19.6e-3;
  p.span_3pb = 10e-3;
  p.beam_mass = 0.46e-3 * 6 / 20;
  return p;
}

TEST(Flexural, EiFromApparentExamples) {
  EXPECT_NEAR(ei_from_apparent(59.1, 0.040), 7.88e-5, 0.005e-5);
  EXPECT_NEAR(ei_from_apparent(1.1, 0.040), 1.467e-6, 0.001e-6);
  EXPECT_DOUBLE_EQ(ei_from_apparent(48.0, 1.0), 1.0);
  const auto f = FlexuralModel::from_ei(2e-5, BeamParams{});
  EXPECT_DOUBLE_EQ(f.joint_stiffness, 2e-5 / 3e-3);
}

TEST(Flexural, StiffnessAtKnotsAndBounds) {
  const auto t = default_stiffness_table();
  EXPECT_DOUBLE_EQ(stiffness_at(0.0, t), 1.1);
  EXPECT_DOUBLE_EQ(stiffness_at(0.4, t), 59.1);
  for (const auto& p : t.points()) EXPECT_EQ(stiffness_at(p.current, t), p.value);
  EXPECT_THROW(stiffness_at(0.41, t), OutOfRange);
}

TEST(Elastica, GradientMatchesFiniteDifferences) {
  testing::Gen gen(301);
  const BeamParams params;
  for (int k = 0; k < 100; ++k) {
    const auto flex = FlexuralModel::from_ei(gen.uniform(1e-6, 1e-4), params);
    BeamLoads loads;
    loads.points.push_back({params.chain_length() * gen.uniform(0.0, 1.0),
                            Vec2(gen.uniform(-0.05, 0.05), gen.uniform(-0.05, 0.05))});
    const auto pr = leg_problem(params, flex, loads);
    Eigen::VectorXd th(pr.dimension());
    for (int i = 0; i < th.size(); ++i) th[i] = gen.uniform(-0.4, 0.4);
    const auto ev = pr.evaluate(th, true);
    Eigen::VectorXd fd(th.size());
    const double h = 1e-6;
    for (int i = 0; i < th.size(); ++i) {
      auto tp = th, tm = th;
      tp[i] += h, tm[i] -= h;
      fd[i] = (pr.energy(tp) - pr.energy(tm)) / (2 * h);
    }
    EXPECT_LT((fd - ev.gradient).norm(), 1e-6 * ev.gradient.norm()) << "state " << k;
    // Hessian against differences of the analytic gradient.
    Eigen::MatrixXd hfd(th.size(), th.size());
    for (int i = 0; i < th.size(); ++i) {
      auto tp = th, tm = th;
      tp[i] += h, tm[i] -= h;
      hfd.col(i) = (pr.evaluate(tp, false).gradient - pr.evaluate(tm, false).gradient) / (2 * h);
    }
    EXPECT_LT((hfd - ev.hessian).norm(), 1e-5 * ev.hessian.norm()) << "state " << k;
    EXPECT_NEAR(ev.value,
                oracle_energy(pr.geometry(), pr.joint_stiffness(), pr.loads(),
                              std::vector<double>(th.data(), th.data() + th.size())),
                1e-12 * std::max(1.0, std::abs(ev.value)));
  }
}

TEST(Elastica, FiveJointOracleAgreement) {
  testing::Gen gen(302);
  const auto params = short_leg();
  for (int k = 0; k < 8; ++k) {
    const auto flex = FlexuralModel::from_ei(gen.uniform(2e-7, 5e-6), params);
    BeamLoads loads;
    loads.points.push_back({params.chain_length(), Vec2(0.0, -gen.uniform(0.0, 5e-3))});
    const auto pr = leg_problem(params, flex, loads);
    ASSERT_EQ(pr.dimension(), 5u);
    const auto eq = equilibrium_shape(params, flex, loads, Support::kCantilever);
    const auto th = coordinate_descent(pr);
    const Vec2 tip_oracle = oracle_tip(pr.geometry(), th);
    EXPECT_LT((eq.shape.tip() - tip_oracle).norm(), 1e-6)
        << "solver " << eq.shape.tip().transpose() << " oracle " << tip_oracle.transpose();
  }
}

TEST(Elastica, ZeroAmpDroopAgreesWithOracle) {
  const BeamParams params;
  const auto table = default_stiffness_table();
  const auto eq = cantilever_deployment(0.0, table, params);
  EXPECT_GT(eq.shape.tip_deflection(), 20e-3);
  const auto pr = leg_problem(params, flexural_model_at(0.0, table, params), BeamLoads{});
  const auto th = coordinate_descent(pr);
  EXPECT_LT((eq.shape.tip() - oracle_tip(pr.geometry(), th)).norm(), 1e-6);
}

TEST(Elastica, EnergyDescendsAndConverges) {
  const BeamParams params;
  const auto table = default_stiffness_table();
  for (double i : {0.0, 0.2, 0.3, 0.4}) {
    const auto eq = cantilever_deployment(i, table, params);
    ASSERT_GE(eq.energy_history.size(), 2u);
    for (std::size_t k = 1; k < eq.energy_history.size(); ++k) {
      EXPECT_LE(eq.energy_history[k], eq.energy_history[k - 1]);
    }
    EXPECT_LE(eq.energy, eq.energy_history.front());
    EXPECT_LT(eq.grad_norm, 1e-9);
  }
}

TEST(Elastica, GravityOffStaysStraight) {
  const BeamParams params;
  BeamLoads none;
  none.gravity = 0.0;
  const auto eq = equilibrium_shape(params, FlexuralModel::from_ei(1e-6, params), none,
                                    Support::kCantilever);
  for (double a : eq.shape.joint_angles) EXPECT_EQ(a, 0.0);
  EXPECT_TRUE(is_deployed(eq.shape, params.leg_length));
}

TEST(Elastica, MirroredLoadsGiveMirroredShape) {
  const BeamParams params;
  const auto flex = FlexuralModel::from_ei(5e-6, params);
  BeamLoads down;
  down.points.push_back({0.04, Vec2(1e-3, -2e-3)});
  BeamLoads up = down;
  up.gravity = -down.gravity;
  up.points[0].force.y() = -up.points[0].force.y();
  const auto a = equilibrium_shape(params, flex, down, Support::kCantilever);
  const auto b = equilibrium_shape(params, flex, up, Support::kCantilever);
  // Left-right: the same beam clamped pointing -x under the x-mirrored load.
  Pose west;
  west.orientation = std::numbers::pi;
  BeamLoads left = down;
  left.points[0].force.x() = -left.points[0].force.x();
  const auto c = equilibrium_shape(params, flex, left, Support::kCantilever, west);
  for (std::size_t j = 0; j < a.shape.joint_angles.size(); ++j) {
    EXPECT_NEAR(b.shape.joint_angles[j], -a.shape.joint_angles[j], 1e-10);
    EXPECT_NEAR(c.shape.joint_angles[j], -a.shape.joint_angles[j], 1e-10);
  }
}

TEST(Elastica, NoConvergenceCarriesLastIterate) {
  const BeamParams params;
  EquilibriumOptions opt;
  opt.minimize.max_iters = 1;
  try {
    cantilever_deployment(0.0, default_stiffness_table(), params, opt);
    FAIL() << "expected NoConvergence";
  } catch (const NoConvergence& e) {
    EXPECT_EQ(e.last_iterate().size(), 19u);
    EXPECT_GT(e.gradient_norm(), 1e-9);
  }
}

TEST(Deployment, FullCurrentMatchesSmallDeflectionTheory) {
  const BeamParams params;
  const auto table = default_stiffness_table();
  const auto eq = cantilever_deployment(0.4, table, params);
  const double L = params.chain_length();
  const double w = params.beam_mass * kGravity / L;
  const double ei = ei_from_apparent(59.1, params.span_3pb);
  const double theory = w * std::pow(L, 4) / (8.0 * ei);
  // Hand evaluation: 0.0752 N/m * (0.06 m)^4 / (8 * 7.88e-5 N m^2)
  EXPECT_NEAR(theory, 1.546e-3, 0.002e-3);
  EXPECT_LT(eq.shape.max_chord_deviation(), 1e-3);
  // Lumped masses and discrete hinges: agreement to within 10%.
  EXPECT_NEAR(eq.shape.tip_deflection(), theory, 0.1 * theory);
}

TEST(Deployment, ThresholdAndMonotoneStraightening) {
  const BeamParams params;
  const auto table = default_stiffness_table();
  EXPECT_FALSE(is_deployed(cantilever_deployment(0.0, table, params).shape, params.leg_length));
  EXPECT_TRUE(is_deployed(cantilever_deployment(0.32, table, params).shape, params.leg_length));
  double prev = std::numeric_limits<double>::infinity();
  EquilibriumOptions opt;
  for (int k = 0; k <= 40; ++k) {
    const double i = 0.01 * k;
    const auto eq = cantilever_deployment(i, table, params, opt);
    const double dev = eq.shape.max_chord_deviation();
    EXPECT_LE(dev, prev * (1 + 1e-12)) << "at " << i << " A";
    prev = dev;
    opt.initial_angles = eq.shape.joint_angles;
  }
}

TEST(Deployment, StraightShapeIsDeployed) {
  BeamShape s;
  s.geometry = leg_geometry(BeamParams{});
  s.joint_angles.assign(19, 0.0);
  EXPECT_TRUE(is_deployed(s, 65e-3));
  EXPECT_THROW(is_deployed(s, 65e-3, 0.0), ValidationError);
}

TEST(ThreePointBend, ZeroIndentationZeroForce) {
  const BeamParams params;
  const auto flex = flexural_model_at(0.4, default_stiffness_table(), params);
  EXPECT_EQ(three_point_bend(params, flex, 0.0).force, 0.0);
  EXPECT_THROW(three_point_bend(params, flex, 4.1e-3), ValidationError);
}

TEST(ThreePointBend, RecoversTableAndIsLinearAtAllLevels) {
  const BeamParams params;
  const auto table = default_stiffness_table();
  for (const auto& knot : table.points()) {
    const auto curve = bend_curve(params, flexural_model_at(knot.current, table, params));
    EXPECT_NEAR(curve.slope, knot.value, 0.05 * knot.value) << knot.current << " A";
    EXPECT_LT(curve.linearity_error, 0.03) << knot.current << " A";
    for (std::size_t i = 1; i < curve.force.size(); ++i) {
      EXPECT_GE(curve.force[i], curve.force[i - 1]);
    }
  }
}

}  // namespace
}  // namespace ccpj::beam
