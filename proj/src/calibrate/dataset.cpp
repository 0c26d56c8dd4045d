#include "ccpj/calibrate/dataset.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include <fmt/format.h>

#include "ccpj/core/error.hpp"

namespace ccpj::calibrate {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

Column parse_column(const std::string& spec, const std::string& where) {
  const auto open = spec.find('[');
  const auto close = spec.find(']');
  if (open == std::string::npos || close == std::string::npos || close < open) {
    throw DataError(fmt::format("{}: column '{}' needs a unit in brackets", where, spec));
  }
  Column c{trim(spec.substr(0, open)), trim(spec.substr(open + 1, close - open - 1))};
  unit_scale(c.unit);
  return c;
}

double parse_number(const std::string& field, const std::string& where) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(field, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != field.size()) {
    throw DataError(fmt::format("{}: '{}' is not a number", where, field));
  }
  return v;
}

}  // namespace

double unit_scale(const std::string& unit) {
  static const std::map<std::string, double> kScale{
      {"1", 1.0},      {"A", 1.0},      {"N/m", 1.0},   {"N", 1.0},     {"s", 1.0},
      {"m", 1.0},      {"mm", 1e-3},    {"m/s", 1.0},   {"mm/s", 1e-3}, {"kg", 1.0},
      {"g", 1e-3},     {"rad", 1.0},    {"deg", std::numbers::pi / 180.0}, {"1/m", 1.0}, {"1/mm", 1e3},
  };
  const auto it = kScale.find(unit);
  if (it == kScale.end()) throw DataError(fmt::format("unknown unit '{}'", unit));
  return it->second;
}

void Dataset::validate() const {
  if (rows.empty()) throw EmptyDataset(fmt::format("dataset '{}' has no rows", name));
  if (name.empty()) throw DataError("dataset has no name");
  if (source != "synthetic" && source.rfind("figure:", 0) != 0) {
    throw DataError(fmt::format(
        "dataset '{}' must cite a figure ('figure: ...') or be marked 'synthetic'", name));
  }
  if (columns.size() < 2) throw DataError(fmt::format("dataset '{}' needs >= 2 columns", name));
  if (!(uncertainty >= 0.0)) throw DataError("uncertainty must be non-negative");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != columns.size()) {
      throw DataError(fmt::format("dataset '{}' row {} has {} fields, expected {}", name, i,
                                  rows[i].size(), columns.size()));
    }
    for (double v : rows[i]) {
      if (!std::isfinite(v)) {
        throw DataError(fmt::format("dataset '{}' row {} has a non-finite value", name, i));
      }
    }
  }
}

Dataset parse_dataset(const std::string& text, const std::string& origin) {
  Dataset d;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  std::vector<double> scales;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = fmt::format("{}:{}", origin, lineno);
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      const std::string body = trim(t.substr(1));
      const auto colon = body.find(':');
      if (colon == std::string::npos) continue;
      const std::string key = trim(body.substr(0, colon));
      const std::string value = trim(body.substr(colon + 1));
      if (key == "name") {
        d.name = value;
      } else if (key == "source") {
        d.source = value;
      } else if (key == "method") {
        d.method = value;
      } else if (key == "uncertainty") {
        d.uncertainty = parse_number(value, where);
      } else if (key == "columns") {
        d.columns.clear();
        scales.clear();
        for (const auto& spec : split(value, ',')) {
          d.columns.push_back(parse_column(spec, where));
          scales.push_back(unit_scale(d.columns.back().unit));
        }
      }
      continue;
    }
    if (d.columns.empty()) {
      throw DataError(fmt::format("{}: data row before the '# columns:' header", where));
    }
    const auto fields = split(t, ',');
    if (fields.size() != d.columns.size()) {
      throw DataError(fmt::format("{}: expected {} fields, got {}", where, d.columns.size(),
                                  fields.size()));
    }
    std::vector<double> row;
    for (std::size_t c = 0; c < fields.size(); ++c) {
      row.push_back(parse_number(fields[c], where) * scales[c]);
    }
    d.rows.push_back(std::move(row));
  }
  if (d.rows.empty()) throw EmptyDataset(fmt::format("{}: no data rows", origin));
  d.validate();
  return d;
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("{}: cannot open dataset", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_dataset(buf.str(), path.string());
}

std::string format_dataset(const Dataset& data) {
  data.validate();
  std::string out;
  out += fmt::format("# name: {}\n# source: {}\n", data.name, data.source);
  if (!data.method.empty()) out += fmt::format("# method: {}\n", data.method);
  out += fmt::format("# uncertainty: {}\n# columns: ", data.uncertainty);
  for (std::size_t c = 0; c < data.columns.size(); ++c) {
    out += fmt::format("{}{} [{}]", c ? ", " : "", data.columns[c].name, data.columns[c].unit);
  }
  out += '\n';
  for (const auto& row : data.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out += fmt::format("{}{}", c ? "," : "", row[c] / unit_scale(data.columns[c].unit));
    }
    out += '\n';
  }
  return out;
}

void write_dataset(const Dataset& data, const std::filesystem::path& path) {
  const std::string text = format_dataset(data);
  std::ofstream out(path);
  if (!out) throw DataError(fmt::format("{}: cannot write dataset", path.string()));
  out << text;
}

}  // namespace ccpj::calibrate
