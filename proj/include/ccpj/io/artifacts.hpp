#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ccpj/gait/sim.hpp"

namespace ccpj::io {

/// Trace as CSV: t_s, x_mm, beta_front_deg, beta_rear_deg, height_mm,
/// anchored_front, anchored_rear. Fixed formatting, so equal traces give
/// equal bytes.
std::string format_trace_csv(const gait::SimTrace& trace);

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct Plot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  std::optional<std::pair<double, double>> marker;  // highlighted point, e.g. an argmax
};

/// Self-contained SVG line chart.
std::string render_svg(const Plot& plot);

/// Summary of one CLI command, written as report.yaml.
struct RunReport {
  std::string command;
  std::string scenario;
  std::string digest;
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<std::pair<std::string, bool>> flags;
  std::vector<std::pair<std::string, std::string>> notes;
  std::vector<std::string> artifacts;  // file names relative to the report
  bool partial = false;                // a step failed; see `error`
  std::string error;
};

std::string format_report(const RunReport& report);

/// Funnels every file a command writes through one place, so a report never
/// names a file that was not written.
class ArtifactWriter {
 public:
  /// Creates `dir` if needed. Throws Error when it cannot be created.
  explicit ArtifactWriter(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }

  /// Writes `name` under the output directory and records it in the report.
  void write(RunReport& report, const std::string& name, const std::string& contents);

  /// Writes report.yaml.
  std::filesystem::path finish(const RunReport& report);

 private:
  std::filesystem::path dir_;
};

}  // namespace ccpj::io
