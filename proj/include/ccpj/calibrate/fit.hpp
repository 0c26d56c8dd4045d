#pragma once

#include <array>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ccpj/calibrate/dataset.hpp"
#include "ccpj/core/calibration_table.hpp"
#include "ccpj/gait/model.hpp"

namespace ccpj::calibrate {

/// Outcome of one fit, in the form written to reports and configs.
struct CalibrationResult {
  std::map<std::string, double> parameters;
  double residual = 0.0;  // root-mean-square error in the dataset's y units (SI)
  std::string dataset;
  std::string method;
};

struct IsotonicResult {
  std::vector<double> values;
  double max_adjustment = 0.0;
};

/// Non-decreasing least-squares fit by pool-adjacent-violators. Weights
/// default to one.
IsotonicResult isotonic_regression(std::span<const double> y, std::span<const double> w = {});

struct StiffnessFit {
  CalibrationTable table;
  double max_adjustment = 0.0;  // N/m
  bool adjusted = false;
  std::vector<std::string> warnings;
  CalibrationResult result;
};

/// Monotone current -> stiffness table from (current [A], stiffness [N/m])
/// rows. Repeated currents are averaged; violations of monotonicity are
/// removed by isotonic regression and reported. Throws EmptyDataset.
StiffnessFit fit_stiffness_table(const Dataset& data);

struct ThermalOptions {
  std::array<double, 2> tau_heat_bounds{0.3, 3.0};
  std::array<double, 2> tau_cool_bounds{0.05, 2.0};
  int grid = 10;                         // points per axis, log-spaced
  std::array<double, 2> peak_window{3.5, 4.5};
  std::array<double, 2> peak_search{2.0, 10.0};
  double peak_step = 0.05;               // s
  double refine_tol = 1e-3;              // relative step at which refinement stops
};

struct ThermalFit {
  gait::ActuatorModel actuator;
  double rmse = 0.0;         // m/s
  double peak_period = 0.0;  // s
  int evaluations = 0;
  CalibrationResult result;
};

/// Period of the fastest gait on the peak-search grid.
double speed_peak_period(const gait::Scenario& scenario, const ThermalOptions& options = {});

/// RMS speed error of `scenario` against (period [s], speed [m/s]) rows.
double speed_rmse(const Dataset& speed_vs_period, const gait::Scenario& scenario);

/// (tau_heat, tau_cool) minimizing the squared speed error of the period
/// sweep: log-spaced grid, then compass-search refinement, subject to the
/// fitted speed peak lying in the peak window. Where the error is flat in
/// tau_cool the largest such tau_cool is returned. Throws NoFeasibleFit with
/// fewer than four points or when no candidate satisfies the peak window.
ThermalFit fit_thermal(const Dataset& speed_vs_period, const gait::Scenario& tmpl,
                       const ThermalOptions& options = {});

/// A measured locomotion speed under given slope, payload and period.
struct OperatingPoint {
  double slope = 0.0;    // rad
  double payload = 0.0;  // kg
  double period = 4.0;   // s
  double speed = 0.0;    // m/s
};

/// Rows of (slope [deg], payload [g], period [s], speed [mm/s]).
std::vector<OperatingPoint> operating_points(const Dataset& data);

/// Slip efficiency an operating point needs, found by bisection on the
/// simulated speed. Clamped to [0, 1].
double required_efficiency(const gait::Scenario& tmpl, const OperatingPoint& point);

struct EfficiencyPoint {
  double slope = 0.0;          // rad
  double payload_ratio = 0.0;  // payload / total mass
  double eta = 0.0;
};

struct SlipFit {
  gait::SlipModel slip;
  std::array<double, 3> efficiency{};
  bool clamped = false;  // eta leaves [0, 1] somewhere on the operating envelope
  std::vector<std::string> warnings;
  CalibrationResult result;
};

/// Exact solve of eta = eta0 - c_slope sin(slope) - c_load ratio through
/// three points. Throws SingularSystem when the points do not determine it.
SlipFit fit_slip(const std::array<EfficiencyPoint, 3>& points, const gait::SlipModel& base = {});

/// Efficiencies from simulated speeds, then the exact solve. Requires exactly
/// three operating points.
SlipFit fit_slip(const std::vector<OperatingPoint>& points, const gait::Scenario& tmpl);

struct FullCalibration {
  StiffnessFit stiffness;
  ThermalFit thermal;
  SlipFit slip;
  gait::Scenario scenario;  // template with every fitted parameter applied
};

/// Stiffness table, then alternating slip and thermal fits (two rounds each)
/// starting from the geometric centre of the thermal search box. The result
/// does not depend on the template's thermal or slip values.
FullCalibration calibrate_all(const Dataset& stiffness, const Dataset& speed_vs_period,
                              const Dataset& operating, const gait::Scenario& tmpl,
                              const ThermalOptions& options = {});

}  // namespace ccpj::calibrate
