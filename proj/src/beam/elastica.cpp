#include "ccpj/beam/elastica.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "ccpj/core/error.hpp"

namespace ccpj::beam {

namespace {

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

std::vector<double> segment_starts(const ChainGeometry& g) {
  std::vector<double> starts(g.segment_lengths.size(), 0.0);
  for (std::size_t s = 1; s < starts.size(); ++s) {
    starts[s] = starts[s - 1] + g.segment_lengths[s - 1];
  }
  return starts;
}

// Segment containing `arc`; the chain's far end belongs to the last segment.
std::pair<int, double> locate(const std::vector<double>& starts, const ChainGeometry& g,
                              double arc) {
  const double total = g.length();
  if (!(arc >= -1e-15 && arc <= total + 1e-15)) {
    throw ValidationError(ValidationError::Kind::kOutOfBounds,
                          fmt::format("arc {} m outside chain of length {} m", arc, total));
  }
  auto it = std::upper_bound(starts.begin(), starts.end(), arc);
  const int s = std::max(0, static_cast<int>(it - starts.begin()) - 1);
  return {s, arc - starts[s]};
}

// Segment orientations and node positions for a joint-angle vector.
struct Kinematics {
  std::vector<double> phi;
  std::vector<Vec2> nodes;
};

Kinematics forward(const ChainGeometry& g, std::span<const double> theta) {
  const std::size_t n = g.segment_lengths.size();
  Kinematics k;
  k.phi.resize(n);
  k.nodes.resize(n + 1);
  k.nodes[0] = g.base.position;
  double phi = g.base.orientation;
  std::size_t j = 0;
  for (std::size_t s = 0; s < n; ++s) {
    while (j < g.joint_segments.size() && g.joint_segments[j] == static_cast<int>(s)) {
      phi += theta[j++];
    }
    k.phi[s] = phi;
    k.nodes[s + 1] = k.nodes[s] + g.segment_lengths[s] * Vec2(std::cos(phi), std::sin(phi));
  }
  return k;
}

}  // namespace

double ChainGeometry::length() const {
  return std::accumulate(segment_lengths.begin(), segment_lengths.end(), 0.0);
}

double ChainGeometry::joint_arc(std::size_t j) const {
  double arc = 0.0;
  for (int s = 0; s < joint_segments[j]; ++s) arc += segment_lengths[s];
  return arc;
}

std::vector<Vec2> BeamShape::nodes() const { return forward(geometry, joint_angles).nodes; }

Vec2 BeamShape::point_at(double arc) const {
  const auto starts = segment_starts(geometry);
  const auto [s, offset] = locate(starts, geometry, arc);
  const auto k = forward(geometry, joint_angles);
  return k.nodes[s] + offset * Vec2(std::cos(k.phi[s]), std::sin(k.phi[s]));
}

double BeamShape::max_chord_deviation() const {
  const auto pts = nodes();
  const Vec2 chord = pts.back() - pts.front();
  const double len = chord.norm();
  double worst = 0.0;
  for (const auto& p : pts) {
    const Vec2 r = p - pts.front();
    const double d = len > 0.0 ? std::abs(cross(chord, r)) / len : r.norm();
    worst = std::max(worst, d);
  }
  return worst;
}

double BeamShape::tip_deflection() const {
  const auto pts = nodes();
  const Vec2 axis(std::cos(geometry.base.orientation), std::sin(geometry.base.orientation));
  return -cross(axis, pts.back() - pts.front());
}

ElasticaProblem::ElasticaProblem(ChainGeometry geometry, std::vector<double> joint_stiffness,
                                 std::vector<PointLoad> loads)
    : geometry_(std::move(geometry)), stiffness_(std::move(joint_stiffness)),
      loads_(std::move(loads)) {
  if (stiffness_.size() != geometry_.joint_count()) {
    throw ValidationError(ValidationError::Kind::kInvalidParameter,
                          "one stiffness per joint is required");
  }
  for (double k : stiffness_) {
    if (!(k > 0.0)) {
      throw ValidationError(ValidationError::Kind::kInvalidParameter,
                            "joint stiffness must be positive");
    }
  }
  for (std::size_t j = 1; j < geometry_.joint_segments.size(); ++j) {
    if (geometry_.joint_segments[j] <= geometry_.joint_segments[j - 1]) {
      throw ValidationError(ValidationError::Kind::kInvalidParameter,
                            "joint segments must be strictly increasing");
    }
  }
  segment_start_ = segment_starts(geometry_);
  for (const auto& load : loads_) {
    if (!load.force.allFinite()) {
      throw ValidationError(ValidationError::Kind::kInvalidParameter, "loads must be finite");
    }
    const auto [s, offset] = locate(segment_start_, geometry_, load.arc);
    load_segment_.push_back(s);
    load_offset_.push_back(offset);
  }
}

Evaluation ElasticaProblem::evaluate(const Eigen::VectorXd& theta, bool with_hessian) const {
  const std::size_t n_joints = dimension();
  const auto k = forward(geometry_, std::span<const double>(theta.data(), theta.size()));

  Evaluation out;
  out.gradient = Eigen::VectorXd::Zero(n_joints);
  // moment_sum[j] = sum over loads distal to joint j of f . (p - q_j); the
  // Hessian entry (j, m) of the load potential equals moment_sum[max(j, m)].
  std::vector<double> moment_sum(n_joints, 0.0);

  double energy = 0.0;
  for (std::size_t j = 0; j < n_joints; ++j) {
    energy += 0.5 * stiffness_[j] * theta[j] * theta[j];
    out.gradient[j] = stiffness_[j] * theta[j];
  }
  for (std::size_t i = 0; i < loads_.size(); ++i) {
    const int s = load_segment_[i];
    const Vec2 p = k.nodes[s] + load_offset_[i] * Vec2(std::cos(k.phi[s]), std::sin(k.phi[s]));
    const Vec2& f = loads_[i].force;
    energy -= f.dot(p);
    for (std::size_t j = 0; j < n_joints && geometry_.joint_segments[j] <= s; ++j) {
      const Vec2 r = p - k.nodes[geometry_.joint_segments[j]];
      out.gradient[j] -= cross(r, f);
      moment_sum[j] += f.dot(r);
    }
  }
  out.value = energy;

  if (with_hessian) {
    out.hessian.resize(n_joints, n_joints);
    for (std::size_t j = 0; j < n_joints; ++j) {
      for (std::size_t m = 0; m < n_joints; ++m) {
        out.hessian(j, m) = moment_sum[std::max(j, m)];
      }
      out.hessian(j, j) += stiffness_[j];
    }
  }
  return out;
}

Evaluation ElasticaProblem::tip_x_constraint(const Eigen::VectorXd& theta, double target,
                                             bool with_hessian) const {
  const std::size_t n_joints = dimension();
  const auto k = forward(geometry_, std::span<const double>(theta.data(), theta.size()));
  const Vec2 tip = k.nodes.back();
  Evaluation out;
  out.value = tip.x() - target;
  out.gradient.resize(n_joints);
  for (std::size_t j = 0; j < n_joints; ++j) {
    out.gradient[j] = -(tip.y() - k.nodes[geometry_.joint_segments[j]].y());
  }
  if (with_hessian) {
    out.hessian.resize(n_joints, n_joints);
    for (std::size_t j = 0; j < n_joints; ++j) {
      for (std::size_t m = 0; m < n_joints; ++m) {
        out.hessian(j, m) = -(tip.x() - k.nodes[geometry_.joint_segments[std::max(j, m)]].x());
      }
    }
  }
  return out;
}

MinimizeResult minimize(const Objective& objective, Eigen::VectorXd theta0,
                        const MinimizeOptions& options) {
  MinimizeResult result;
  result.theta = std::move(theta0);
  Evaluation current = objective(result.theta, true);
  if (options.record_history) result.energy_history.push_back(current.value);

  for (int it = 0; it < options.max_iters; ++it) {
    result.grad_norm = current.gradient.lpNorm<Eigen::Infinity>();
    if (result.grad_norm < options.tol_grad) {
      result.energy = current.value;
      result.iterations = it;
      return result;
    }

    const Eigen::VectorXd& g = current.gradient;
    Eigen::VectorXd direction;
    bool newton = false;
    Eigen::LLT<Eigen::MatrixXd> llt(current.hessian);
    if (llt.info() == Eigen::Success) {
      direction = -llt.solve(g);
      newton = direction.allFinite() && g.dot(direction) < 0.0;
    }
    if (!newton) {
      // Steepest descent scaled by the largest curvature, plus a push along
      // the most negative curvature direction so saddles are left behind.
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(current.hessian);
      const auto& values = eig.eigenvalues();
      const double scale = std::max(values.cwiseAbs().maxCoeff(), 1e-300);
      direction = -g / scale;
      if (values[0] < 0.0) {
        Eigen::VectorXd v = eig.eigenvectors().col(0);
        if (v.dot(g) > 0.0) v = -v;
        direction += 0.1 * v;
      }
    }

    const double slope = g.dot(direction);
    // Once the predicted decrease sinks below the rounding noise of the
    // energy, Armijo comparisons are meaningless; take the Newton step as is.
    const double noise =
        64.0 * std::numeric_limits<double>::epsilon() * std::abs(current.value);
    const bool below_noise = newton && -slope <= noise;
    double step = 1.0;
    bool accepted = false;
    Evaluation trial;
    Eigen::VectorXd candidate;
    if (below_noise) {
      candidate = result.theta + direction;
      trial = objective(candidate, false);
      accepted = trial.value <= current.value + noise &&
                 trial.gradient.lpNorm<Eigen::Infinity>() < result.grad_norm;
    } else {
      for (int halving = 0; halving < 60; ++halving, step *= 0.5) {
        candidate = result.theta + step * direction;
        trial = objective(candidate, false);
        if (std::isfinite(trial.value) &&
            trial.value <= current.value + options.armijo * step * slope) {
          accepted = true;
          break;
        }
      }
    }
    if (!accepted) {
      throw NoConvergence(
          fmt::format("line search stalled at iteration {} (gradient norm {:.3e})", it,
                      result.grad_norm),
          std::vector<double>(result.theta.data(), result.theta.data() + result.theta.size()),
          result.grad_norm, it);
    }
    result.theta = candidate;
    current = objective(result.theta, true);
    (newton ? result.newton_steps : result.gradient_steps)++;
    if (options.record_history) result.energy_history.push_back(current.value);
  }

  result.grad_norm = current.gradient.lpNorm<Eigen::Infinity>();
  if (result.grad_norm < options.tol_grad) {
    result.energy = current.value;
    result.iterations = options.max_iters;
    return result;
  }
  throw NoConvergence(
      fmt::format("no convergence after {} iterations (gradient norm {:.3e})", options.max_iters,
                  result.grad_norm),
      std::vector<double>(result.theta.data(), result.theta.data() + result.theta.size()),
      result.grad_norm, options.max_iters);
}

MinimizeResult solve_equilibrium(const ElasticaProblem& problem, Eigen::VectorXd theta0,
                                 std::optional<double> guide_x, const MinimizeOptions& options) {
  if (static_cast<std::size_t>(theta0.size()) != problem.dimension()) {
    throw ValidationError(ValidationError::Kind::kInvalidParameter,
                          "initial guess has the wrong number of joint angles");
  }
  if (!guide_x) {
    return minimize([&](const Eigen::VectorXd& t, bool h) { return problem.evaluate(t, h); },
                    std::move(theta0), options);
  }

  const double max_k =
      *std::max_element(problem.joint_stiffness().begin(), problem.joint_stiffness().end());
  const double length = problem.geometry().length();
  const double rho = 1e3 * max_k / (length * length);
  double multiplier = 0.0;
  MinimizeResult result;
  Eigen::VectorXd theta = std::move(theta0);
  std::vector<double> history;

  for (int outer = 0; outer < 200; ++outer) {
    auto augmented = [&](const Eigen::VectorXd& t, bool h) {
      Evaluation e = problem.evaluate(t, h);
      const Evaluation c = problem.tip_x_constraint(t, *guide_x, h);
      const double lambda = multiplier + rho * c.value;
      e.value += multiplier * c.value + 0.5 * rho * c.value * c.value;
      e.gradient += lambda * c.gradient;
      if (h) e.hessian += lambda * c.hessian + rho * c.gradient * c.gradient.transpose();
      return e;
    };
    result = minimize(augmented, theta, options);
    history.insert(history.end(), result.energy_history.begin(), result.energy_history.end());
    theta = result.theta;
    const double violation = problem.tip_x_constraint(theta, *guide_x, false).value;
    multiplier += rho * violation;
    if (std::abs(violation) < 1e-8 * length) {
      result.energy = problem.energy(theta);
      result.energy_history = std::move(history);
      return result;
    }
  }
  throw NoConvergence("tip guide constraint did not converge",
                      std::vector<double>(theta.data(), theta.data() + theta.size()),
                      result.grad_norm, 200);
}

}  // namespace ccpj::beam
