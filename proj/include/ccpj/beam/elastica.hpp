#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace ccpj::beam {

using Vec2 = Eigen::Vector2d;

struct Pose {
  Vec2 position = Vec2::Zero();
  double orientation = 0.0;  // rad, counter-clockwise from +x
};

/// Rigid segments laid end to end from a clamped base. A joint sits at the
/// start of the segment it names; segment 0 carries a joint only when the
/// base itself may rotate.
struct ChainGeometry {
  std::vector<double> segment_lengths;
  std::vector<int> joint_segments;  // strictly increasing
  Pose base;

  double length() const;
  std::size_t joint_count() const { return joint_segments.size(); }
  /// Arc position (from the base) at which joint `j` sits.
  double joint_arc(std::size_t j) const;
};

/// Dead load fixed to a material point of the chain, world frame.
struct PointLoad {
  double arc = 0.0;  // m from the base
  Vec2 force = Vec2::Zero();
};

/// A configuration of the chain: relative joint angles on a fixed geometry.
struct BeamShape {
  ChainGeometry geometry;
  std::vector<double> joint_angles;

  /// Segment end points, base first; size = segments + 1.
  std::vector<Vec2> nodes() const;
  Vec2 point_at(double arc) const;
  Vec2 tip() const { return nodes().back(); }

  /// Largest distance of any node from the chord joining base and tip.
  double max_chord_deviation() const;
  /// Transverse offset of the tip from the line through the base along the
  /// clamp orientation (positive below it for a horizontal clamp).
  double tip_deflection() const;
};

/// Energy, gradient and (optionally) Hessian at one state.
struct Evaluation {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;  // empty unless requested
};

/// Discrete elastica: E(theta) = sum 1/2 k_j theta_j^2 - sum_i f_i . p_i(theta).
class ElasticaProblem {
 public:
  ElasticaProblem(ChainGeometry geometry, std::vector<double> joint_stiffness,
                  std::vector<PointLoad> loads);

  const ChainGeometry& geometry() const { return geometry_; }
  const std::vector<double>& joint_stiffness() const { return stiffness_; }
  const std::vector<PointLoad>& loads() const { return loads_; }
  std::size_t dimension() const { return stiffness_.size(); }

  Evaluation evaluate(const Eigen::VectorXd& theta, bool with_hessian) const;
  double energy(const Eigen::VectorXd& theta) const { return evaluate(theta, false).value; }

  /// Tip x-coordinate minus `target`, with analytic derivatives. Used to hold
  /// the tip on a vertical guide line.
  Evaluation tip_x_constraint(const Eigen::VectorXd& theta, double target,
                              bool with_hessian) const;

 private:
  ChainGeometry geometry_;
  std::vector<double> stiffness_;
  std::vector<PointLoad> loads_;
  std::vector<double> segment_start_;
  std::vector<int> load_segment_;
  std::vector<double> load_offset_;
};

struct MinimizeOptions {
  double tol_grad = 1e-9;  // infinity norm, N*m
  int max_iters = 500;
  double armijo = 1e-4;
  bool record_history = true;
};

struct MinimizeResult {
  Eigen::VectorXd theta;
  double energy = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  int newton_steps = 0;
  int gradient_steps = 0;
  std::vector<double> energy_history;  // one entry per accepted iterate, start included
};

using Objective = std::function<Evaluation(const Eigen::VectorXd&, bool)>;

/// Damped Newton with Armijo backtracking; falls back to steepest descent
/// whenever the Hessian is not positive definite. Energy never increases
/// between accepted iterates. Throws NoConvergence after `max_iters`.
MinimizeResult minimize(const Objective& objective, Eigen::VectorXd theta0,
                        const MinimizeOptions& options = {});

/// Equilibrium of `problem`, optionally with the tip held on the vertical line
/// x = *guide_x (augmented Lagrangian around `minimize`).
MinimizeResult solve_equilibrium(const ElasticaProblem& problem, Eigen::VectorXd theta0,
                                 std::optional<double> guide_x = std::nullopt,
                                 const MinimizeOptions& options = {});

}  // namespace ccpj::beam
