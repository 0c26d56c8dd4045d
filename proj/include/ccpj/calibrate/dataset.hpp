#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace ccpj::calibrate {

struct Column {
  std::string name;
  std::string unit;  // as written in the file; values are held in SI

  friend bool operator==(const Column&, const Column&) = default;
};

/// Tabulated measurements with provenance.
///
/// File layout: `#`-prefixed `key: value` header lines, then comma-separated
/// rows. Required keys are `name`, `source` and `columns`; `method` and
/// `uncertainty` are optional. `columns` lists `name [unit]` entries.
///
///   # name: speed_vs_period
///   # source: figure: speed over actuation period
///   # uncertainty: 0.15
///   # columns: period [s], speed [mm/s]
///   4.0,8.5
struct Dataset {
  std::string name;
  std::string source;   // "figure: <caption>" or "synthetic"
  std::string method;
  double uncertainty = 0.0;  // relative
  std::vector<Column> columns;
  std::vector<std::vector<double>> rows;  // SI units

  std::size_t size() const { return rows.size(); }
  double x(std::size_t i) const { return rows[i][0]; }
  double y(std::size_t i) const { return rows[i][1]; }
  bool synthetic() const { return source == "synthetic"; }

  /// Throws EmptyDataset with no rows and DataError on any other violation
  /// (ragged rows, non-finite values, missing provenance).
  void validate() const;
};

/// Scale from a unit name to SI. Throws DataError for unknown units.
double unit_scale(const std::string& unit);

/// Throws DataError with `file:line:` context on malformed input.
Dataset read_dataset(const std::filesystem::path& path);
Dataset parse_dataset(const std::string& text, const std::string& origin = "<memory>");
void write_dataset(const Dataset& data, const std::filesystem::path& path);
std::string format_dataset(const Dataset& data);

}  // namespace ccpj::calibrate
