#pragma once

// Reference minimizer for the bead-chain energy, independent of the library's
// solver: the energy is re-derived here and minimized coordinate by coordinate.

#include <cmath>
#include <vector>

#include "ccpj/beam/elastica.hpp"

namespace ccpj::beam {

// Potential energy written out from scratch: springs minus the work of dead
// loads at their material points. Shares nothing with ElasticaProblem.
inline double oracle_energy(const ChainGeometry& g, const std::vector<double>& k,
                            const std::vector<PointLoad>& loads,
                            const std::vector<double>& theta) {
  const std::size_t n = g.segment_lengths.size();
  std::vector<double> phi(n), start_arc(n);
  std::vector<Vec2> start(n);
  double a = g.base.orientation, arc = 0.0;
  Vec2 p = g.base.position;
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t j = 0; j < g.joint_segments.size(); ++j) {
      if (g.joint_segments[j] == static_cast<int>(s)) a += theta[j];
    }
    phi[s] = a, start[s] = p, start_arc[s] = arc;
    p += g.segment_lengths[s] * Vec2(std::cos(a), std::sin(a));
    arc += g.segment_lengths[s];
  }
  double e = 0.0;
  for (std::size_t j = 0; j < theta.size(); ++j) e += 0.5 * k[j] * theta[j] * theta[j];
  for (const auto& l : loads) {
    std::size_t s = 0;
    while (s + 1 < n && start_arc[s + 1] <= l.arc) ++s;
    const Vec2 at = start[s] + (l.arc - start_arc[s]) * Vec2(std::cos(phi[s]), std::sin(phi[s]));
    e -= l.force.dot(at);
  }
  return e;
}

inline Vec2 oracle_tip(const ChainGeometry& g, const std::vector<double>& theta) {
  double a = g.base.orientation;
  Vec2 p = g.base.position;
  for (std::size_t s = 0; s < g.segment_lengths.size(); ++s) {
    for (std::size_t j = 0; j < g.joint_segments.size(); ++j) {
      if (g.joint_segments[j] == static_cast<int>(s)) a += theta[j];
    }
    p += g.segment_lengths[s] * Vec2(std::cos(a), std::sin(a));
  }
  return p;
}

// Cyclic coordinate descent with a golden-section line search per joint.
inline std::vector<double> coordinate_descent(const ElasticaProblem& pr) {
  std::vector<double> th(pr.dimension(), 0.0);
  auto e = [&](const std::vector<double>& t) {
    return oracle_energy(pr.geometry(), pr.joint_stiffness(), pr.loads(), t);
  };
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int sweep = 0; sweep < 20000; ++sweep) {
    double moved = 0.0;
    for (std::size_t j = 0; j < th.size(); ++j) {
      double lo = th[j] - 0.5, hi = th[j] + 0.5;
      auto at = [&](double v) {
        auto t = th;
        t[j] = v;
        return e(t);
      };
      double x1 = hi - r * (hi - lo), x2 = lo + r * (hi - lo);
      double f1 = at(x1), f2 = at(x2);
      while (hi - lo > 1e-13) {
        if (f1 < f2) {
          hi = x2, x2 = x1, f2 = f1, x1 = hi - r * (hi - lo), f1 = at(x1);
        } else {
          lo = x1, x1 = x2, f1 = f2, x2 = lo + r * (hi - lo), f2 = at(x2);
        }
      }
      const double v = 0.5 * (lo + hi);
      moved = std::max(moved, std::abs(v - th[j]));
      th[j] = v;
    }
    if (moved < 1e-12) break;
  }
  return th;
}

}  // namespace ccpj::beam
