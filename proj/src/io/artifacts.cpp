#include "ccpj/io/artifacts.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "ccpj/core/error.hpp"
#include "ccpj/core/units.hpp"

namespace ccpj::io {

std::string format_trace_csv(const gait::SimTrace& trace) {
  std::string out = "t_s,x_mm,beta_front_deg,beta_rear_deg,height_mm,anchored_front,anchored_rear\n";
  out.reserve(out.size() + trace.records.size() * 64);
  for (const auto& r : trace.records) {
    out += fmt::format("{:.4f},{:.6f},{:.6f},{:.6f},{:.6f},{:d},{:d}\n", r.t, r.x_body * 1e3,
                       rad_to_deg(r.beta[0]), rad_to_deg(r.beta[1]), r.height * 1e3,
                       static_cast<int>(r.anchored[0]), static_cast<int>(r.anchored[1]));
  }
  return out;
}

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

// Round numbers for axis ticks: 1, 2 or 5 times a power of ten.
double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) return m * mag;
  }
  return 10.0 * mag;
}

}  // namespace

std::string render_svg(const Plot& plot) {
  constexpr double kW = 640, kH = 400, kL = 70, kR = 20, kT = 40, kB = 55;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : plot.series) {
    for (double v : s.x) {
      if (std::isfinite(v)) x0 = std::min(x0, v), x1 = std::max(x1, v);
    }
    for (double v : s.y) {
      if (std::isfinite(v)) y0 = std::min(y0, v), y1 = std::max(y1, v);
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  y0 = std::min(y0, 0.0);
  if (y1 <= y0) y1 = y0 + 1;
  const double xs = nice_step(x1 - x0, 8), ys = nice_step(y1 - y0, 6);
  x0 = std::floor(x0 / xs) * xs, x1 = std::ceil(x1 / xs) * xs;
  y0 = std::floor(y0 / ys) * ys, y1 = std::ceil(y1 / ys) * ys;
  auto px = [&](double x) { return kL + (x - x0) / (x1 - x0) * (kW - kL - kR); };
  auto py = [&](double y) { return kH - kB - (y - y0) / (y1 - y0) * (kH - kT - kB); };

  std::string o = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" "
      "viewBox=\"0 0 {} {}\" font-family=\"sans-serif\" font-size=\"12\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
      kW, kH, kW, kH);
  o += fmt::format("<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
                   kW / 2, escape(plot.title));
  for (double x = x0; x <= x1 + 1e-9 * xs; x += xs) {
    o += fmt::format(
        "<line x1=\"{0:.1f}\" y1=\"{1}\" x2=\"{0:.1f}\" y2=\"{2}\" stroke=\"#ddd\"/>"
        "<text x=\"{0:.1f}\" y=\"{3}\" text-anchor=\"middle\">{4:g}</text>\n",
        px(x), kT, kH - kB, kH - kB + 16, x);
  }
  for (double y = y0; y <= y1 + 1e-9 * ys; y += ys) {
    o += fmt::format(
        "<line x1=\"{0}\" y1=\"{1:.1f}\" x2=\"{2}\" y2=\"{1:.1f}\" stroke=\"#ddd\"/>"
        "<text x=\"{3}\" y=\"{4:.1f}\" text-anchor=\"end\">{5:g}</text>\n",
        kL, py(y), kW - kR, kL - 6, py(y) + 4, y);
  }
  o += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
                   kL, kT, kW - kL - kR, kH - kT - kB);
  o += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", (kL + kW - kR) / 2,
                   kH - 14, escape(plot.x_label));
  o += fmt::format(
      "<text x=\"18\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {0})\">{1}</text>\n",
      (kT + kH - kB) / 2, escape(plot.y_label));

  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  for (std::size_t k = 0; k < plot.series.size(); ++k) {
    const auto& s = plot.series[k];
    const char* color = kColors[k % 5];
    std::string pts;
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      pts += fmt::format("{:.1f},{:.1f} ", px(s.x[i]), py(s.y[i]));
    }
    o += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
                     color, pts);
    if (!s.label.empty()) {
      o += fmt::format("<text x=\"{}\" y=\"{}\" fill=\"{}\">{}</text>\n", kL + 10,
                       kT + 16 + 16 * static_cast<double>(k), color, escape(s.label));
    }
  }
  if (plot.marker) {
    const auto [mx, my] = *plot.marker;
    o += fmt::format(
        "<circle cx=\"{:.1f}\" cy=\"{:.1f}\" r=\"5\" fill=\"none\" stroke=\"black\" stroke-width=\"2\"/>"
        "<text x=\"{:.1f}\" y=\"{:.1f}\">({:.3g}, {:.3g})</text>\n",
        px(mx), py(my), px(mx) + 8, py(my) - 8, mx, my);
  }
  o += "</svg>\n";
  return o;
}

std::string format_report(const RunReport& report) {
  YAML::Emitter e;
  e << YAML::BeginMap;
  e << YAML::Key << "command" << YAML::Value << report.command;
  e << YAML::Key << "scenario" << YAML::Value << report.scenario;
  e << YAML::Key << "digest" << YAML::Value << report.digest;
  e << YAML::Key << "status" << YAML::Value << (report.partial ? "partial" : "ok");
  if (!report.error.empty()) e << YAML::Key << "error" << YAML::Value << report.error;
  e << YAML::Key << "metrics" << YAML::Value << YAML::BeginMap;
  for (const auto& [k, v] : report.metrics) {
    e << YAML::Key << k << YAML::Value
      << (std::isfinite(v) ? fmt::format("{:.6g}", v) : std::string(v > 0 ? ".inf" : "-.inf"));
  }
  e << YAML::EndMap;
  e << YAML::Key << "flags" << YAML::Value << YAML::BeginMap;
  for (const auto& [k, v] : report.flags) e << YAML::Key << k << YAML::Value << v;
  e << YAML::EndMap;
  if (!report.notes.empty()) {
    e << YAML::Key << "notes" << YAML::Value << YAML::BeginMap;
    for (const auto& [k, v] : report.notes) e << YAML::Key << k << YAML::Value << v;
    e << YAML::EndMap;
  }
  e << YAML::Key << "artifacts" << YAML::Value << YAML::BeginSeq;
  for (const auto& a : report.artifacts) e << a;
  e << YAML::EndSeq << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

ArtifactWriter::ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec || !std::filesystem::is_directory(dir_)) {
    throw Error(fmt::format("cannot create output directory '{}'", dir_.string()));
  }
}

void ArtifactWriter::write(RunReport& report, const std::string& name, const std::string& contents) {
  const auto path = dir_ / name;
  std::ofstream out(path, std::ios::binary);
  out << contents;
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  report.artifacts.push_back(name);
}

std::filesystem::path ArtifactWriter::finish(const RunReport& report) {
  const auto path = dir_ / "report.yaml";
  std::ofstream out(path, std::ios::binary);
  out << format_report(report);
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  return path;
}

}  // namespace ccpj::io
