#include "ccpj/calibrate/fit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/LU>
#include <fmt/format.h>

#include "ccpj/core/error.hpp"
#include "ccpj/core/parallel.hpp"
#include "ccpj/gait/sim.hpp"

namespace ccpj::calibrate {

IsotonicResult isotonic_regression(std::span<const double> y, std::span<const double> w) {
  if (!w.empty() && w.size() != y.size()) {
    throw ValidationError(ValidationError::Kind::kInvalidParameter,
                          "weights must match the values");
  }
  struct Block {
    double mean;
    double weight;
    std::size_t count;
  };
  std::vector<Block> blocks;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double wi = w.empty() ? 1.0 : w[i];
    if (!(wi > 0.0)) {
      throw ValidationError(ValidationError::Kind::kInvalidParameter, "weights must be positive");
    }
    blocks.push_back({y[i], wi, 1});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].mean > blocks.back().mean) {
      const Block b = blocks.back();
      blocks.pop_back();
      Block& a = blocks.back();
      a.mean = (a.mean * a.weight + b.mean * b.weight) / (a.weight + b.weight);
      a.weight += b.weight;
      a.count += b.count;
    }
  }
  IsotonicResult out;
  for (const auto& b : blocks) out.values.insert(out.values.end(), b.count, b.mean);
  for (std::size_t i = 0; i < y.size(); ++i) {
    out.max_adjustment = std::max(out.max_adjustment, std::abs(out.values[i] - y[i]));
  }
  return out;
}

StiffnessFit fit_stiffness_table(const Dataset& data) {
  data.validate();
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < data.size(); ++i) pts.emplace_back(data.x(i), data.y(i));
  std::stable_sort(pts.begin(), pts.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  std::vector<double> currents;
  std::vector<double> values;
  std::vector<double> weights;
  for (const auto& [c, v] : pts) {
    if (!currents.empty() && c == currents.back()) {
      values.back() = (values.back() * weights.back() + v) / (weights.back() + 1.0);
      weights.back() += 1.0;
    } else {
      currents.push_back(c);
      values.push_back(v);
      weights.push_back(1.0);
    }
  }
  if (currents.size() < 2) {
    throw ValidationError(ValidationError::Kind::kTooFewPoints,
                          "a stiffness table needs at least two distinct currents");
  }

  const IsotonicResult iso = isotonic_regression(values, weights);
  StiffnessFit fit{CalibrationTable({{0.0, 0.0}, {1.0, 0.0}}), 0.0, false, {}, {}};
  std::vector<TablePoint> table;
  for (std::size_t i = 0; i < currents.size(); ++i) {
    const double v = std::max(0.0, iso.values[i]);
    const double moved = std::abs(v - values[i]);
    if (moved > 0.0) fit.adjusted = true;
    fit.max_adjustment = std::max(fit.max_adjustment, moved);
    if (moved > data.uncertainty * std::abs(values[i])) {
      fit.warnings.push_back(fmt::format(
          "point at {:.3f} A moved by {:.4g} N/m, beyond the {:.0f}% digitization uncertainty",
          currents[i], moved, 100.0 * data.uncertainty));
    }
    table.push_back({currents[i], v});
  }
  fit.table = CalibrationTable(std::move(table));

  double sq = 0.0;
  for (const auto& [c, v] : pts) {
    const double r = fit.table.interpolate(c) - v;
    sq += r * r;
  }
  fit.result.parameters["knots"] = static_cast<double>(currents.size());
  fit.result.parameters["max_adjustment_N_per_m"] = fit.max_adjustment;
  fit.result.residual = std::sqrt(sq / static_cast<double>(pts.size()));
  fit.result.dataset = data.name;
  fit.result.method = "isotonic regression (pool adjacent violators)";
  return fit;
}

double speed_peak_period(const gait::Scenario& scenario, const ThermalOptions& options) {
  std::vector<double> periods;
  for (double T = options.peak_search[0]; T <= options.peak_search[1] + 1e-9;
       T += options.peak_step) {
    periods.push_back(T);
  }
  const auto curve = gait::sweep_period(scenario, periods);
  const auto best = std::max_element(curve.begin(), curve.end(), [](const auto& a, const auto& b) {
    return a.speed < b.speed;
  });
  return best->period;
}

double speed_rmse(const Dataset& speed_vs_period, const gait::Scenario& scenario) {
  std::vector<double> periods;
  for (std::size_t i = 0; i < speed_vs_period.size(); ++i) {
    periods.push_back(speed_vs_period.x(i));
  }
  const auto curve = gait::sweep_period(scenario, periods);
  double sq = 0.0;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const double r = curve[i].speed - speed_vs_period.y(i);
    sq += r * r;
  }
  return std::sqrt(sq / static_cast<double>(curve.size()));
}

ThermalFit fit_thermal(const Dataset& speed_vs_period, const gait::Scenario& tmpl,
                       const ThermalOptions& options) {
  if (speed_vs_period.size() < 4) {
    throw NoFeasibleFit(fmt::format("thermal fit needs at least 4 (period, speed) points, got {}",
                                    speed_vs_period.size()));
  }
  speed_vs_period.validate();

  struct Candidate {
    double log_h;
    double log_c;
    double rmse = 0.0;
  };
  ThermalFit fit;
  auto with_taus = [&](double log_h, double log_c) {
    gait::Scenario s = tmpl;
    s.actuator.tau_heat = std::exp(log_h);
    s.actuator.tau_cool = std::exp(log_c);
    return s;
  };
  auto score = [&](Candidate c) {
    c.rmse = speed_rmse(speed_vs_period, with_taus(c.log_h, c.log_c));
    return c;
  };
  auto peak_ok = [&](const Candidate& c, double* peak) {
    const double p = speed_peak_period(with_taus(c.log_h, c.log_c), options);
    if (peak) *peak = p;
    return p >= options.peak_window[0] - 1e-9 && p <= options.peak_window[1] + 1e-9;
  };

  const double lh0 = std::log(options.tau_heat_bounds[0]);
  const double lh1 = std::log(options.tau_heat_bounds[1]);
  const double lc0 = std::log(options.tau_cool_bounds[0]);
  const double lc1 = std::log(options.tau_cool_bounds[1]);
  const int n = std::max(2, options.grid);
  std::vector<Candidate> grid;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      grid.push_back({lh0 + (lh1 - lh0) * i / (n - 1), lc0 + (lc1 - lc0) * j / (n - 1)});
    }
  }
  grid = parallel_map(grid, score);
  fit.evaluations = static_cast<int>(grid.size());
  std::stable_sort(grid.begin(), grid.end(),
                   [](const Candidate& a, const Candidate& b) { return a.rmse < b.rmse; });

  const Candidate* start = nullptr;
  for (const auto& c : grid) {
    if (peak_ok(c, nullptr)) {
      start = &c;
      break;
    }
  }
  if (!start) {
    throw NoFeasibleFit(fmt::format(
        "no thermal constants in the search box put the speed peak inside [{}, {}] s",
        options.peak_window[0], options.peak_window[1]));
  }

  Candidate best = *start;
  double step_h = (lh1 - lh0) / (n - 1) / 2.0;
  double step_c = (lc1 - lc0) / (n - 1) / 2.0;
  while (step_h > options.refine_tol || step_c > options.refine_tol) {
    std::vector<Candidate> trial;
    for (auto [dh, dc] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
      const double h = best.log_h + dh * step_h;
      const double c = best.log_c + dc * step_c;
      if (h < lh0 - 1e-12 || h > lh1 + 1e-12 || c < lc0 - 1e-12 || c > lc1 + 1e-12) continue;
      trial.push_back({h, c});
    }
    trial = parallel_map(trial, score);
    fit.evaluations += static_cast<int>(trial.size());
    std::stable_sort(trial.begin(), trial.end(),
                     [](const Candidate& a, const Candidate& b) { return a.rmse < b.rmse; });
    bool moved = false;
    for (const auto& c : trial) {
      if (c.rmse >= best.rmse) break;
      if (peak_ok(c, nullptr)) {
        best = c;
        moved = true;
        break;
      }
    }
    if (!moved) {
      step_h *= 0.5;
      step_c *= 0.5;
    }
  }

  // Fast cooling is invisible in the speed curve once the cords cool within
  // half a period, so the error is flat in tau_cool below some value. Take
  // the slowest cooling on that plateau; it is the only identifiable one.
  const double tie = 1e-9 * best.rmse + 1e-15;
  for (double step = (lc1 - lc0) / (n - 1) / 2.0; step > options.refine_tol; step *= 0.5) {
    while (best.log_c + step <= lc1 + 1e-12) {
      const Candidate c = score({best.log_h, best.log_c + step});
      ++fit.evaluations;
      if (c.rmse > best.rmse + tie || !peak_ok(c, nullptr)) break;
      best = c;
    }
  }

  fit.actuator = tmpl.actuator;
  fit.actuator.tau_heat = std::exp(best.log_h);
  fit.actuator.tau_cool = std::exp(best.log_c);
  fit.rmse = best.rmse;
  peak_ok(best, &fit.peak_period);
  fit.result.parameters = {{"tau_heat_s", fit.actuator.tau_heat},
                           {"tau_cool_s", fit.actuator.tau_cool},
                           {"peak_period_s", fit.peak_period}};
  fit.result.residual = fit.rmse;
  fit.result.dataset = speed_vs_period.name;
  fit.result.method = "log-spaced grid then compass search, peak-window constrained";
  return fit;
}

std::vector<OperatingPoint> operating_points(const Dataset& data) {
  data.validate();
  if (data.columns.size() != 4) {
    throw DataError(fmt::format(
        "dataset '{}' needs columns slope, payload, period, speed; found {} columns", data.name,
        data.columns.size()));
  }
  std::vector<OperatingPoint> out;
  for (const auto& row : data.rows) out.push_back({row[0], row[1], row[2], row[3]});
  return out;
}

double required_efficiency(const gait::Scenario& tmpl, const OperatingPoint& point) {
  if (tmpl.terrain.perfect_anchoring()) {
    throw ValidationError(ValidationError::Kind::kInvalidParameter,
                          "slip efficiency is only defined with finite backward friction");
  }
  gait::Scenario s = tmpl;
  s.terrain.slope = point.slope;
  s.payload_mass = point.payload;
  s.slip.c_slope = 0.0;
  s.slip.c_load = 0.0;
  s.slip.noise_sd = 0.0;
  auto speed = [&](double eta) {
    s.slip.eta0 = eta;
    return gait::speed_at_period(s, point.period);
  };
  if (speed(1.0) <= point.speed) return 1.0;
  if (speed(0.0) >= point.speed) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (speed(mid) < point.speed ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

SlipFit fit_slip(const std::array<EfficiencyPoint, 3>& points, const gait::SlipModel& base) {
  Eigen::Matrix3d a;
  Eigen::Vector3d b;
  for (int i = 0; i < 3; ++i) {
    a.row(i) << 1.0, -std::sin(points[i].slope), -points[i].payload_ratio;
    b[i] = points[i].eta;
  }
  Eigen::FullPivLU<Eigen::Matrix3d> lu(a);
  lu.setThreshold(1e-10);
  if (lu.rank() < 3) {
    throw SingularSystem(
        "operating points do not determine the slip model (need distinct slope and payload "
        "variation)");
  }
  const Eigen::Vector3d x = lu.solve(b);

  SlipFit fit;
  fit.slip = base;
  fit.slip.eta0 = x[0];
  fit.slip.c_slope = x[1];
  fit.slip.c_load = x[2];
  for (int i = 0; i < 3; ++i) fit.efficiency[i] = points[i].eta;

  double max_slope = 0.0;
  double max_ratio = 0.0;
  for (const auto& p : points) {
    max_slope = std::max(max_slope, p.slope);
    max_ratio = std::max(max_ratio, p.payload_ratio);
  }
  for (double s : {0.0, max_slope}) {
    for (double r : {0.0, max_ratio}) {
      const double eta = x[0] - x[1] * std::sin(s) - x[2] * r;
      if (eta < -1e-12 || eta > 1.0 + 1e-12) {
        fit.clamped = true;
        fit.warnings.push_back(fmt::format(
            "eta = {:.4f} at slope {:.1f} deg, payload ratio {:.2f} is clamped to [0, 1]", eta,
            rad_to_deg(s), r));
      }
    }
  }
  if (x[1] < 0.0 || x[2] < 0.0) {
    fit.warnings.push_back("negative slip coefficient: speed would grow with slope or payload");
  }
  fit.result.parameters = {
      {"eta0", x[0]}, {"c_slope", x[1]}, {"c_load", x[2]}};
  fit.result.method = "exact 3x3 solve of the affine slip model";
  return fit;
}

SlipFit fit_slip(const std::vector<OperatingPoint>& points, const gait::Scenario& tmpl) {
  if (points.size() != 3) {
    throw ValidationError(ValidationError::Kind::kInvalidParameter,
                          fmt::format("slip fit needs exactly 3 operating points, got {}",
                                      points.size()));
  }
  const auto etas =
      parallel_map(points, [&tmpl](const OperatingPoint& p) { return required_efficiency(tmpl, p); });
  std::array<EfficiencyPoint, 3> eff;
  for (std::size_t i = 0; i < 3; ++i) {
    eff[i] = {points[i].slope, points[i].payload / tmpl.robot.total_mass, etas[i]};
  }
  SlipFit fit = fit_slip(eff, tmpl.slip);

  gait::Scenario s = tmpl;
  s.slip = fit.slip;
  const auto speeds = parallel_map(points, [&s](const OperatingPoint& p) {
    gait::Scenario c = s;
    c.terrain.slope = p.slope;
    c.payload_mass = p.payload;
    return gait::speed_at_period(c, p.period);
  });
  double sq = 0.0;
  for (std::size_t i = 0; i < 3; ++i) sq += std::pow(speeds[i] - points[i].speed, 2);
  fit.result.residual = std::sqrt(sq / 3.0);
  fit.result.method = "bisection for the efficiency at each point, then " + fit.result.method;
  return fit;
}

FullCalibration calibrate_all(const Dataset& stiffness, const Dataset& speed_vs_period,
                              const Dataset& operating, const gait::Scenario& tmpl,
                              const ThermalOptions& options) {
  FullCalibration out{fit_stiffness_table(stiffness), {}, {}, tmpl};
  const auto points = operating_points(operating);
  // Start from the centre of the search box rather than whatever the template
  // holds, so recalibrating an already calibrated config gives the same answer.
  out.scenario.actuator.tau_heat =
      std::sqrt(options.tau_heat_bounds[0] * options.tau_heat_bounds[1]);
  out.scenario.actuator.tau_cool =
      std::sqrt(options.tau_cool_bounds[0] * options.tau_cool_bounds[1]);
  for (int round = 0; round < 2; ++round) {
    out.slip = fit_slip(points, out.scenario);
    out.scenario.slip = out.slip.slip;
    out.thermal = fit_thermal(speed_vs_period, out.scenario, options);
    out.scenario.actuator = out.thermal.actuator;
  }
  // Finish on the slip fit so the operating points are reproduced exactly.
  out.slip = fit_slip(points, out.scenario);
  out.scenario.slip = out.slip.slip;
  out.slip.result.dataset = operating.name;

  out.thermal.rmse = speed_rmse(speed_vs_period, out.scenario);
  out.thermal.peak_period = speed_peak_period(out.scenario, options);
  out.thermal.result.residual = out.thermal.rmse;
  out.thermal.result.parameters["peak_period_s"] = out.thermal.peak_period;
  return out;
}

}  // namespace ccpj::calibrate
