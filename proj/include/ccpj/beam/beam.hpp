#pragma once

#include <optional>
#include <vector>

#include "ccpj/beam/elastica.hpp"
#include "ccpj/core/calibration_table.hpp"
#include "ccpj/core/params.hpp"

namespace ccpj::beam {

/// Effective flexural rigidity of a leg and the torsional stiffness of each
/// inter-bead joint it implies.
struct FlexuralModel {
  double ei = 0.0;               // N*m^2
  double joint_stiffness = 0.0;  // N*m/rad

  /// joint_stiffness = ei / bead_thickness.
  static FlexuralModel from_ei(double ei, const BeamParams& params);
};

/// Apparent stiffness at `current`; monotone piecewise-linear in the table.
double stiffness_at(double current, const CalibrationTable& table);

/// Simply supported, centre-loaded beam: EI = k_app * span^3 / 48.
double ei_from_apparent(double k_app, double span);

/// Flexural model of a leg driven at `current`.
FlexuralModel flexural_model_at(double current, const CalibrationTable& table,
                                const BeamParams& params);

enum class Support {
  kCantilever,    // first bead clamped, far end free
  kClampedGuided  // first bead clamped, tip held on a vertical line, free to slide along it
};

struct BeamLoads {
  double gravity = kGravity;  // m/s^2, acts along -y; lumped at bead centres
  std::vector<PointLoad> points;
};

struct EquilibriumOptions {
  MinimizeOptions minimize;
  std::optional<std::vector<double>> initial_angles;  // warm start; straight otherwise
};

struct Equilibrium {
  BeamShape shape;
  double energy = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  std::vector<double> energy_history;
};

/// Bead chain clamped at `base`: one rigid segment per bead, joints between beads.
ChainGeometry leg_geometry(const BeamParams& params, const Pose& base = {});

/// Builds the energy for a leg under `loads`.
ElasticaProblem leg_problem(const BeamParams& params, const FlexuralModel& flex,
                            const BeamLoads& loads, const Pose& base = {});

/// Local minimum of the leg's potential energy. For kClampedGuided the tip is
/// held at the x-coordinate of the undeformed tip.
Equilibrium equilibrium_shape(const BeamParams& params, const FlexuralModel& flex,
                              const BeamLoads& loads, Support support, const Pose& base = {},
                              const EquilibriumOptions& options = {});

/// Horizontally clamped leg under its own weight at `current`.
Equilibrium cantilever_deployment(double current, const CalibrationTable& table,
                                  const BeamParams& params,
                                  const EquilibriumOptions& options = {});

/// Straightness test: max distance of the shape from its base-to-tip chord
/// below `tol_frac` times the leg length.
bool is_deployed(const BeamShape& shape, double leg_length, double tol_frac = 0.02);

struct BendResult {
  double force = 0.0;                 // N, indentor reaction
  double contact_arc = 0.0;           // m from midspan to the support contact
  std::vector<double> half_angles;    // half-model joint angles, reusable as a warm start
};

/// Indentor force for a centre indentation of a simply supported leg on the
/// fixture span. Solved on the symmetric half beam with the supports fixed in
/// space; gravity is tared out. `indentation` must lie in [0, 4 mm].
BendResult three_point_bend(const BeamParams& params, const FlexuralModel& flex,
                            double indentation,
                            const std::optional<std::vector<double>>& warm_start = std::nullopt);

struct BendCurve {
  std::vector<double> indentation;  // m
  std::vector<double> force;        // N
  double slope = 0.0;               // least-squares through the origin, N/m
  double linearity_error = 0.0;     // max |F / (slope * d) - 1| over d > 0
};

/// Force-indentation curve sampled on `samples` equal steps up to `max_indentation`.
BendCurve bend_curve(const BeamParams& params, const FlexuralModel& flex,
                     double max_indentation = 4e-3, int samples = 8);

}  // namespace ccpj::beam
