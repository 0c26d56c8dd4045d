#include "ccpj/beam/beam.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "ccpj/core/error.hpp"

namespace ccpj::beam {

FlexuralModel FlexuralModel::from_ei(double ei, const BeamParams& params) {
  if (!(ei > 0.0)) {
    throw ValidationError(ValidationError::Kind::kInvalidParameter,
                          "flexural rigidity must be positive");
  }
  return {ei, ei / params.bead_thickness};
}

double stiffness_at(double current, const CalibrationTable& table) {
  return table.interpolate(current);
}

double ei_from_apparent(double k_app, double span) {
  if (!(k_app > 0.0) || !(span > 0.0)) {
    throw ValidationError(ValidationError::Kind::kInvalidParameter,
                          "apparent stiffness and span must be positive");
  }
  return k_app * span * span * span / 48.0;
}

FlexuralModel flexural_model_at(double current, const CalibrationTable& table,
                                const BeamParams& params) {
  return FlexuralModel::from_ei(ei_from_apparent(stiffness_at(current, table), params.span_3pb),
                                params);
}

ChainGeometry leg_geometry(const BeamParams& params, const Pose& base) {
  ChainGeometry g;
  g.segment_lengths.assign(params.n_beads, params.bead_thickness);
  for (int s = 1; s < params.n_beads; ++s) g.joint_segments.push_back(s);
  g.base = base;
  return g;
}

ElasticaProblem leg_problem(const BeamParams& params, const FlexuralModel& flex,
                            const BeamLoads& loads, const Pose& base) {
  auto geometry = leg_geometry(params, base);
  std::vector<PointLoad> points = loads.points;
  if (loads.gravity != 0.0) {
    const double weight = params.bead_mass() * loads.gravity;
    for (int b = 0; b < params.n_beads; ++b) {
      points.push_back({(b + 0.5) * params.bead_thickness, Vec2(0.0, -weight)});
    }
  }
  std::vector<double> stiffness(geometry.joint_count(), flex.joint_stiffness);
  return ElasticaProblem(std::move(geometry), std::move(stiffness), std::move(points));
}

Equilibrium equilibrium_shape(const BeamParams& params, const FlexuralModel& flex,
                              const BeamLoads& loads, Support support, const Pose& base,
                              const EquilibriumOptions& options) {
  params.validate();
  if (!(flex.ei > 0.0) || !(flex.joint_stiffness > 0.0)) {
    throw ValidationError(ValidationError::Kind::kInvalidParameter,
                          "flexural model must have positive stiffness");
  }
  const ElasticaProblem problem = leg_problem(params, flex, loads, base);
  Eigen::VectorXd theta0 = Eigen::VectorXd::Zero(problem.dimension());
  if (options.initial_angles) {
    if (options.initial_angles->size() != problem.dimension()) {
      throw ValidationError(ValidationError::Kind::kInvalidParameter,
                            "warm start has the wrong number of joint angles");
    }
    theta0 = Eigen::Map<const Eigen::VectorXd>(options.initial_angles->data(),
                                               options.initial_angles->size());
  }

  std::optional<double> guide;
  if (support == Support::kClampedGuided) {
    guide = base.position.x() + params.chain_length() * std::cos(base.orientation);
  }
  MinimizeResult r = solve_equilibrium(problem, theta0, guide, options.minimize);

  Equilibrium eq;
  eq.shape.geometry = problem.geometry();
  eq.shape.joint_angles.assign(r.theta.data(), r.theta.data() + r.theta.size());
  eq.energy = problem.energy(r.theta);
  eq.grad_norm = r.grad_norm;
  eq.iterations = r.iterations;
  eq.energy_history = std::move(r.energy_history);
  return eq;
}

Equilibrium cantilever_deployment(double current, const CalibrationTable& table,
                                  const BeamParams& params, const EquilibriumOptions& options) {
  const FlexuralModel flex = flexural_model_at(current, table, params);
  return equilibrium_shape(params, flex, BeamLoads{}, Support::kCantilever, Pose{}, options);
}

bool is_deployed(const BeamShape& shape, double leg_length, double tol_frac) {
  if (!(tol_frac > 0.0)) {
    throw ValidationError(ValidationError::Kind::kInvalidParameter, "tol_frac must be positive");
  }
  return shape.max_chord_deviation() < tol_frac * leg_length;
}

namespace {

// Half of the symmetric bend specimen, midspan at the origin pointing +x. The
// midspan joint carries twice the joint stiffness: half of its rotation
// belongs to each side.
ChainGeometry half_specimen(const BeamParams& params, std::vector<double>& stiffness,
                            double joint_stiffness) {
  ChainGeometry g;
  const int n = params.n_beads;
  const double l = params.bead_thickness;
  stiffness.clear();
  if (n % 2 == 0) {
    g.segment_lengths.assign(n / 2, l);
    for (int s = 0; s < n / 2; ++s) {
      g.joint_segments.push_back(s);
      stiffness.push_back(s == 0 ? 2.0 * joint_stiffness : joint_stiffness);
    }
  } else {
    g.segment_lengths.push_back(0.5 * l);
    for (int s = 1; s <= n / 2; ++s) {
      g.segment_lengths.push_back(l);
      g.joint_segments.push_back(s);
      stiffness.push_back(joint_stiffness);
    }
  }
  return g;
}

struct HalfSolve {
  double deflection = 0.0;
  double contact_arc = 0.0;
  Eigen::VectorXd theta;
};

// Deflection of the support contact for a given total indentor force. The
// support is fixed at x = span/2, so the contact slides along the beam.
HalfSolve solve_half(const BeamParams& params, const FlexuralModel& flex, double force,
                     Eigen::VectorXd theta, double contact_arc) {
  std::vector<double> stiffness;
  const ChainGeometry geometry = half_specimen(params, stiffness, flex.joint_stiffness);
  const double half_span = 0.5 * params.span_3pb;
  MinimizeOptions opts;
  opts.tol_grad = std::max(1e-18, 1e-9 * std::abs(force) * half_span);
  opts.record_history = false;

  HalfSolve out;
  for (int it = 0; it < 100; ++it) {
    ElasticaProblem problem(geometry, stiffness, {{contact_arc, Vec2(0.0, 0.5 * force)}});
    theta = minimize([&](const Eigen::VectorXd& t, bool h) { return problem.evaluate(t, h); },
                     theta, opts)
                .theta;
    BeamShape shape{geometry, std::vector<double>(theta.data(), theta.data() + theta.size())};
    const Vec2 p = shape.point_at(contact_arc);
    const double miss = half_span - p.x();
    out.deflection = p.y();
    if (std::abs(miss) < 1e-12 * half_span) break;
    contact_arc = std::min(geometry.length(), contact_arc + miss);
  }
  out.contact_arc = contact_arc;
  out.theta = std::move(theta);
  return out;
}

}  // namespace

BendResult three_point_bend(const BeamParams& params, const FlexuralModel& flex,
                            double indentation,
                            const std::optional<std::vector<double>>& warm_start) {
  params.validate();
  if (!(indentation >= 0.0 && indentation <= 4e-3 + 1e-15)) {
    throw ValidationError(ValidationError::Kind::kOutOfBounds,
                          fmt::format("indentation {} m outside [0, 4 mm]", indentation));
  }
  std::vector<double> stiffness;
  const std::size_t dim = half_specimen(params, stiffness, flex.joint_stiffness).joint_count();
  BendResult result;
  result.contact_arc = 0.5 * params.span_3pb;
  if (indentation == 0.0) {
    result.half_angles.assign(dim, 0.0);
    return result;
  }

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(dim);
  if (warm_start && warm_start->size() == dim) {
    theta = Eigen::Map<const Eigen::VectorXd>(warm_start->data(), dim);
  }
  const double span = params.span_3pb;
  double force = 48.0 * flex.ei * indentation / (span * span * span);
  double arc = 0.5 * span;
  HalfSolve solve;
  for (int it = 0; it < 100; ++it) {
    solve = solve_half(params, flex, force, theta, arc);
    theta = solve.theta;
    arc = solve.contact_arc;
    if (std::abs(solve.deflection - indentation) < 1e-10 * indentation) break;
    // Near-linear response: rescale the force by the deflection ratio.
    force *= indentation / solve.deflection;
  }
  result.force = force;
  result.contact_arc = arc;
  result.half_angles.assign(theta.data(), theta.data() + theta.size());
  return result;
}

BendCurve bend_curve(const BeamParams& params, const FlexuralModel& flex, double max_indentation,
                     int samples) {
  BendCurve curve;
  std::optional<std::vector<double>> warm;
  double num = 0.0;
  double den = 0.0;
  for (int i = 0; i <= samples; ++i) {
    const double d = max_indentation * i / samples;
    BendResult r = three_point_bend(params, flex, d, warm);
    warm = r.half_angles;
    curve.indentation.push_back(d);
    curve.force.push_back(r.force);
    num += d * r.force;
    den += d * d;
  }
  curve.slope = num / den;
  for (std::size_t i = 1; i < curve.force.size(); ++i) {
    const double rel = std::abs(curve.force[i] / (curve.slope * curve.indentation[i]) - 1.0);
    curve.linearity_error = std::max(curve.linearity_error, rel);
  }
  return curve;
}

}  // namespace ccpj::beam
