#include "ccpj/io/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "ccpj/core/error.hpp"

namespace ccpj::io {

namespace {

constexpr int kMaxBaseDepth = 8;

using Keys = std::set<std::string>;

const std::map<std::string, Keys>& section_keys() {
  static const std::map<std::string, Keys> kKeys{
      {"", {"schema_version", "base", "name", "robot", "stiffness", "posture", "actuator", "slip",
            "signal", "terrain", "confined_control", "payload_g", "duration_s", "dt_s", "seed"}},
      {"robot",
       {"n_beads", "bead_thickness_mm", "slack_mm", "leg_length_mm", "beam_mass_g", "span_3pb_mm",
        "n_legs", "leg_tilt_deg", "total_mass_g", "freestanding_height_mm", "deployed_width_mm",
        "compact_box_mm", "deployed_box_mm"}},
      {"stiffness", {"current_a", "stiffness_n_per_m"}},
      {"posture", {"current_a", "height_mm"}},
      {"actuator", {"tau_heat_s", "tau_cool_s", "i_threshold_a", "band_start", "band_finish"}},
      {"slip", {"eta0", "c_slope", "c_load", "eta_front_only", "noise_sd"}},
      {"signal", {"period_s", "duty", "i_high_a", "i_low_a", "mask", "phase"}},
      {"terrain",
       {"slope_deg", "surface", "pitch_mm", "tooth_height_mm", "mu_forward", "mu_backward",
        "confinement"}},
      {"terrain.confinement", {"x_begin_mm", "x_end_mm", "gap_mm", "width_mm"}},
      {"confined_control", {"mask", "i_high_a"}},
  };
  return kKeys;
}

int line_of(const YAML::Node& node) { return node.Mark().is_null() ? 0 : node.Mark().line + 1; }

/// Walks one file's YAML tree onto a Config, recording every key it sets.
class Reader {
 public:
  Reader(std::string origin, Config& config, Keys& seen)
      : origin_(std::move(origin)), cfg_(config), seen_(seen) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& field,
                         const std::string& message) const {
    const int line = line_of(node);
    const std::string where = line > 0 ? fmt::format("{}:{}", origin_, line) : origin_;
    throw ConfigError(fmt::format("{}: {}: {}", where, field, message), field, line);
  }

  void require_map(const YAML::Node& node, const std::string& field) const {
    if (!node.IsMap()) fail(node, field.empty() ? "<root>" : field, "expected a mapping");
    const auto& allowed = section_keys().at(field);
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.count(key)) {
        fail(kv.first, field.empty() ? key : field + "." + key, "unknown key");
      }
    }
  }

  double number(const YAML::Node& node, const std::string& field) const {
    if (!node.IsScalar()) fail(node, field, "expected a number");
    const std::string s = node.Scalar();
    if (s == "inf" || s == ".inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf" || s == "-.inf") return -std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size() || std::isnan(v)) {
      fail(node, field, fmt::format("'{}' is not a number", s));
    }
    return v;
  }

  int integer(const YAML::Node& node, const std::string& field) const {
    const double v = number(node, field);
    if (v != std::floor(v) || std::abs(v) > 1e9) fail(node, field, "expected an integer");
    return static_cast<int>(v);
  }

  std::vector<double> numbers(const YAML::Node& node, const std::string& field) const {
    if (!node.IsSequence()) fail(node, field, "expected a list of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < node.size(); ++i) {
      out.push_back(number(node[i], fmt::format("{}[{}]", field, i)));
    }
    return out;
  }

  std::string text(const YAML::Node& node, const std::string& field) const {
    if (!node.IsScalar()) fail(node, field, "expected a string");
    return node.Scalar();
  }

  /// Calls `set` with the value of `key` when present.
  template <typename F>
  void opt(const YAML::Node& map, const std::string& section, const std::string& key, F set) {
    const YAML::Node node = map[key];
    if (!node) return;
    const std::string field = section.empty() ? key : section + "." + key;
    seen_.insert(field);
    try {
      set(node, field);
    } catch (const ValidationError& e) {
      fail(node, field, e.what());
    }
  }

  void apply(const YAML::Node& root) {
    require_map(root, "");
    const YAML::Node version = root["schema_version"];
    if (!version) fail(root, "schema_version", "missing required field");
    const int v = integer(version, "schema_version");
    if (v != kSchemaVersion) {
      fail(version, "schema_version",
           fmt::format("unsupported version {} (this build reads {})", v, kSchemaVersion));
    }
    opt(root, "", "name", [&](auto& n, auto& f) { cfg_.name = text(n, f); });
    if (root["robot"]) robot(root["robot"]);
    if (root["stiffness"]) cfg_.stiffness = table(root["stiffness"], "stiffness", "stiffness_n_per_m", 1.0);
    if (root["posture"]) cfg_.scenario.posture = table(root["posture"], "posture", "height_mm", 1e-3);
    if (root["actuator"]) actuator(root["actuator"]);
    if (root["slip"]) slip(root["slip"]);
    if (root["signal"]) signal(root["signal"]);
    if (root["terrain"]) terrain(root["terrain"]);
    if (root["confined_control"]) confined(root["confined_control"]);
    auto& s = cfg_.scenario;
    opt(root, "", "payload_g", [&](auto& n, auto& f) { s.payload_mass = number(n, f) * 1e-3; });
    opt(root, "", "duration_s", [&](auto& n, auto& f) { s.duration = number(n, f); });
    opt(root, "", "dt_s", [&](auto& n, auto& f) { s.dt = number(n, f); });
    opt(root, "", "seed", [&](auto& n, auto& f) {
      const double x = number(n, f);
      if (x < 0 || x != std::floor(x)) fail(n, f, "expected a non-negative integer");
      s.seed = static_cast<std::uint64_t>(x);
    });
  }

 private:
  void robot(const YAML::Node& m) {
    require_map(m, "robot");
    auto& r = cfg_.scenario.robot;
    const std::string sec = "robot";
    opt(m, sec, "n_beads", [&](auto& n, auto& f) { r.leg.n_beads = integer(n, f); });
    opt(m, sec, "bead_thickness_mm", [&](auto& n, auto& f) { r.leg.bead_thickness = number(n, f) * 1e-3; });
    opt(m, sec, "slack_mm", [&](auto& n, auto& f) { r.leg.slack = number(n, f) * 1e-3; });
    opt(m, sec, "leg_length_mm", [&](auto& n, auto& f) { r.leg.leg_length = number(n, f) * 1e-3; });
    opt(m, sec, "beam_mass_g", [&](auto& n, auto& f) { r.leg.beam_mass = number(n, f) * 1e-3; });
    opt(m, sec, "span_3pb_mm", [&](auto& n, auto& f) { r.leg.span_3pb = number(n, f) * 1e-3; });
    opt(m, sec, "n_legs", [&](auto& n, auto& f) { r.n_legs = integer(n, f); });
    opt(m, sec, "leg_tilt_deg", [&](auto& n, auto& f) { r.leg_tilt_deploy = deg_to_rad(number(n, f)); });
    opt(m, sec, "total_mass_g", [&](auto& n, auto& f) { r.total_mass = number(n, f) * 1e-3; });
    opt(m, sec, "freestanding_height_mm",
        [&](auto& n, auto& f) { r.freestanding_height = number(n, f) * 1e-3; });
    opt(m, sec, "deployed_width_mm", [&](auto& n, auto& f) { r.deployed_width = number(n, f) * 1e-3; });
    opt(m, sec, "compact_box_mm", [&](auto& n, auto& f) { r.compact_box = box(n, f); });
    opt(m, sec, "deployed_box_mm", [&](auto& n, auto& f) { r.deployed_box = box(n, f); });
  }

  Box3 box(const YAML::Node& node, const std::string& field) const {
    const auto v = numbers(node, field);
    if (v.size() != 3) fail(node, field, "expected three side lengths");
    return {v[0] * 1e-3, v[1] * 1e-3, v[2] * 1e-3};
  }

  CalibrationTable table(const YAML::Node& m, const std::string& sec, const std::string& value_key,
                         double scale) {
    require_map(m, sec);
    const std::string fc = sec + ".current_a";
    const std::string fv = sec + "." + value_key;
    if (!m["current_a"]) fail(m, fc, "missing required field");
    if (!m[value_key]) fail(m, fv, "missing required field");
    seen_.insert(fc);
    seen_.insert(fv);
    const auto currents = numbers(m["current_a"], fc);
    const auto values = numbers(m[value_key], fv);
    if (currents.size() != values.size()) {
      fail(m[value_key], fv, fmt::format("has {} entries but {} has {}", values.size(), fc,
                                         currents.size()));
    }
    std::vector<TablePoint> pts;
    for (std::size_t i = 0; i < currents.size(); ++i) pts.push_back({currents[i], values[i] * scale});
    try {
      return CalibrationTable(std::move(pts));
    } catch (const ValidationError& e) {
      fail(m, sec, e.what());
    }
  }

  void actuator(const YAML::Node& m) {
    require_map(m, "actuator");
    auto& a = cfg_.scenario.actuator;
    const std::string sec = "actuator";
    opt(m, sec, "tau_heat_s", [&](auto& n, auto& f) { a.tau_heat = number(n, f); });
    opt(m, sec, "tau_cool_s", [&](auto& n, auto& f) { a.tau_cool = number(n, f); });
    opt(m, sec, "i_threshold_a", [&](auto& n, auto& f) { a.i_threshold = number(n, f); });
    opt(m, sec, "band_start", [&](auto& n, auto& f) { a.band_start = number(n, f); });
    opt(m, sec, "band_finish", [&](auto& n, auto& f) { a.band_finish = number(n, f); });
  }

  void slip(const YAML::Node& m) {
    require_map(m, "slip");
    auto& s = cfg_.scenario.slip;
    const std::string sec = "slip";
    opt(m, sec, "eta0", [&](auto& n, auto& f) { s.eta0 = number(n, f); });
    opt(m, sec, "c_slope", [&](auto& n, auto& f) { s.c_slope = number(n, f); });
    opt(m, sec, "c_load", [&](auto& n, auto& f) { s.c_load = number(n, f); });
    opt(m, sec, "eta_front_only", [&](auto& n, auto& f) { s.eta_front_only = number(n, f); });
    opt(m, sec, "noise_sd", [&](auto& n, auto& f) { s.noise_sd = number(n, f); });
  }

  LegMask mask(const YAML::Node& node, const std::string& field) const {
    const auto m = parse_leg_mask(text(node, field));
    if (!m) fail(node, field, "expected 'all' or 'front_only'");
    return *m;
  }

  void signal(const YAML::Node& m) {
    require_map(m, "signal");
    auto& g = cfg_.scenario.signal;
    const std::string sec = "signal";
    opt(m, sec, "period_s", [&](auto& n, auto& f) { g.period = number(n, f); });
    opt(m, sec, "duty", [&](auto& n, auto& f) { g.duty = number(n, f); });
    opt(m, sec, "i_high_a", [&](auto& n, auto& f) { g.i_high = Current(number(n, f)); });
    opt(m, sec, "i_low_a", [&](auto& n, auto& f) { g.i_low = Current(number(n, f)); });
    opt(m, sec, "mask", [&](auto& n, auto& f) { g.mask = to_enable_flags(mask(n, f)); });
    opt(m, sec, "phase", [&](auto& n, auto& f) {
      const auto v = numbers(n, f);
      if (v.size() != kGroupCount) fail(n, f, "expected [front, rear]");
      g.phase = {v[0], v[1]};
    });
  }

  void terrain(const YAML::Node& m) {
    require_map(m, "terrain");
    auto& t = cfg_.scenario.terrain;
    const std::string sec = "terrain";
    opt(m, sec, "slope_deg", [&](auto& n, auto& f) { t.slope = deg_to_rad(number(n, f)); });
    opt(m, sec, "surface", [&](auto& n, auto& f) {
      const auto s = text(n, f);
      if (s == "smooth") {
        t.surface = gait::Surface::kSmooth;
      } else if (s == "ratchet") {
        t.surface = gait::Surface::kRatchet;
      } else {
        fail(n, f, "expected 'smooth' or 'ratchet'");
      }
    });
    opt(m, sec, "pitch_mm", [&](auto& n, auto& f) { t.pitch = number(n, f) * 1e-3; });
    opt(m, sec, "tooth_height_mm", [&](auto& n, auto& f) { t.tooth_height = number(n, f) * 1e-3; });
    opt(m, sec, "mu_forward", [&](auto& n, auto& f) { t.mu_forward = number(n, f); });
    opt(m, sec, "mu_backward", [&](auto& n, auto& f) { t.mu_backward = number(n, f); });
    opt(m, sec, "confinement", [&](auto& n, auto& f) {
      if (!n.IsSequence()) fail(n, f, "expected a list of segments");
      t.confinement.clear();
      for (std::size_t i = 0; i < n.size(); ++i) {
        const YAML::Node seg = n[i];
        const std::string fi = fmt::format("{}[{}]", f, i);
        if (!seg.IsMap()) fail(seg, fi, "expected a mapping");
        for (const auto& kv : seg) {
          const auto key = kv.first.as<std::string>();
          if (!section_keys().at("terrain.confinement").count(key)) {
            fail(kv.first, fi + "." + key, "unknown key");
          }
        }
        gait::ConfinedSegment c;
        if (seg["x_begin_mm"]) c.x_begin = number(seg["x_begin_mm"], fi + ".x_begin_mm") * 1e-3;
        if (seg["x_end_mm"]) c.x_end = number(seg["x_end_mm"], fi + ".x_end_mm") * 1e-3;
        if (seg["gap_mm"]) c.gap = number(seg["gap_mm"], fi + ".gap_mm") * 1e-3;
        if (seg["width_mm"]) c.width = number(seg["width_mm"], fi + ".width_mm") * 1e-3;
        if (!c.gap && !c.width) fail(seg, fi, "segment needs gap_mm or width_mm");
        t.confinement.push_back(c);
      }
    });
  }

  void confined(const YAML::Node& m) {
    require_map(m, "confined_control");
    gait::ConfinedControl c = cfg_.scenario.confined_control.value_or(gait::ConfinedControl{});
    const std::string sec = "confined_control";
    opt(m, sec, "mask", [&](auto& n, auto& f) { c.mask = mask(n, f); });
    opt(m, sec, "i_high_a", [&](auto& n, auto& f) { c.i_high = Current(number(n, f)).amps(); });
    cfg_.scenario.confined_control = c;
  }

  std::string origin_;
  Config& cfg_;
  Keys& seen_;
};

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("{}: cannot open config", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void apply_text(const std::string& text, const std::string& origin,
                const std::filesystem::path& dir, Config& cfg, Keys& seen, int depth) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(fmt::format("{}:{}: {}", origin, e.mark.line + 1, e.msg), "",
                      e.mark.line + 1);
  }
  if (!root.IsDefined() || root.IsNull()) throw ConfigError(fmt::format("{}: empty config", origin));
  Reader reader(origin, cfg, seen);
  if (root.IsMap() && root["base"]) {
    const YAML::Node b = root["base"];
    const std::string name = reader.text(b, "base");
    if (depth >= kMaxBaseDepth) reader.fail(b, "base", "base chain is too deep (cycle?)");
    const auto path = dir / name;
    std::string base_text;
    try {
      base_text = read_text(path);
    } catch (const ConfigError&) {
      reader.fail(b, "base", fmt::format("cannot open '{}'", path.string()));
    }
    apply_text(base_text, path.string(), path.parent_path(), cfg, seen, depth + 1);
  }
  reader.apply(root);
}

Config resolve(const std::string& text, const std::string& origin,
               const std::filesystem::path& dir) {
  Config cfg;
  Keys seen;
  apply_text(text, origin, dir, cfg, seen, 0);
  if (!seen.count("signal.period_s")) {
    throw ConfigError(fmt::format("{}: signal.period_s: missing required field", origin),
                      "signal.period_s");
  }
  if (cfg.name.empty()) cfg.name = std::filesystem::path(origin).stem().string();
  try {
    cfg.scenario.validate();
  } catch (const ValidationError& e) {
    throw ConfigError(fmt::format("{}: {}", origin, e.what()));
  }
  return cfg;
}

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? ".inf" : "-.inf";
  // 12 significant digits hide unit-conversion noise such as 59.99999999999999.
  return fmt::format("{:.12g}", v);
}

std::string list(const std::vector<double>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + num(v[i]);
  return out + "]";
}

}  // namespace

Config load_config(const std::filesystem::path& path) {
  return resolve(read_text(path), path.string(), path.parent_path());
}

Config parse_config(const std::string& text, const std::string& origin,
                    const std::filesystem::path& dir) {
  return resolve(text, origin, dir);
}

std::string format_config(const Config& config) {
  const auto& s = config.scenario;
  const auto& r = s.robot;
  const auto& t = s.terrain;
  std::string o;
  auto line = [&o](const std::string& text) { o += text + '\n'; };
  line(fmt::format("schema_version: {}", kSchemaVersion));
  line(fmt::format("name: {}", config.name.empty() ? "unnamed" : config.name));
  line("robot:");
  line(fmt::format("  n_beads: {}", r.leg.n_beads));
  line(fmt::format("  bead_thickness_mm: {}", num(r.leg.bead_thickness * 1e3)));
  line(fmt::format("  slack_mm: {}", num(r.leg.slack * 1e3)));
  line(fmt::format("  leg_length_mm: {}", num(r.leg.leg_length * 1e3)));
  line(fmt::format("  beam_mass_g: {}", num(r.leg.beam_mass * 1e3)));
  line(fmt::format("  span_3pb_mm: {}", num(r.leg.span_3pb * 1e3)));
  line(fmt::format("  n_legs: {}", r.n_legs));
  line(fmt::format("  leg_tilt_deg: {}", num(rad_to_deg(r.leg_tilt_deploy))));
  line(fmt::format("  total_mass_g: {}", num(r.total_mass * 1e3)));
  line(fmt::format("  freestanding_height_mm: {}", num(r.freestanding_height * 1e3)));
  line(fmt::format("  deployed_width_mm: {}", num(r.deployed_width * 1e3)));
  auto box = [](const Box3& b) { return list({b.x * 1e3, b.y * 1e3, b.z * 1e3}); };
  line(fmt::format("  compact_box_mm: {}", box(r.compact_box)));
  line(fmt::format("  deployed_box_mm: {}", box(r.deployed_box)));
  auto table = [&](const char* name, const CalibrationTable& tab, const char* key, double scale) {
    std::vector<double> c, v;
    for (const auto& p : tab.points()) {
      c.push_back(p.current);
      v.push_back(p.value * scale);
    }
    line(fmt::format("{}:", name));
    line(fmt::format("  current_a: {}", list(c)));
    line(fmt::format("  {}: {}", key, list(v)));
  };
  table("stiffness", config.stiffness, "stiffness_n_per_m", 1.0);
  table("posture", s.posture, "height_mm", 1e3);
  line("actuator:");
  line(fmt::format("  tau_heat_s: {}", num(s.actuator.tau_heat)));
  line(fmt::format("  tau_cool_s: {}", num(s.actuator.tau_cool)));
  line(fmt::format("  i_threshold_a: {}", num(s.actuator.i_threshold)));
  line(fmt::format("  band_start: {}", num(s.actuator.band_start)));
  line(fmt::format("  band_finish: {}", num(s.actuator.band_finish)));
  line("slip:");
  line(fmt::format("  eta0: {}", num(s.slip.eta0)));
  line(fmt::format("  c_slope: {}", num(s.slip.c_slope)));
  line(fmt::format("  c_load: {}", num(s.slip.c_load)));
  line(fmt::format("  eta_front_only: {}", num(s.slip.eta_front_only)));
  line(fmt::format("  noise_sd: {}", num(s.slip.noise_sd)));
  line("signal:");
  line(fmt::format("  period_s: {}", num(s.signal.period)));
  line(fmt::format("  duty: {}", num(s.signal.duty)));
  line(fmt::format("  i_high_a: {}", num(s.signal.i_high.amps())));
  line(fmt::format("  i_low_a: {}", num(s.signal.i_low.amps())));
  const bool front_only = s.signal.mask[0] && !s.signal.mask[1];
  line(fmt::format("  mask: {}", to_string(front_only ? LegMask::kFrontOnly : LegMask::kAllLegs)));
  line(fmt::format("  phase: {}", list({s.signal.phase[0], s.signal.phase[1]})));
  line("terrain:");
  line(fmt::format("  slope_deg: {}", num(rad_to_deg(t.slope))));
  line(fmt::format("  surface: {}", t.surface == gait::Surface::kRatchet ? "ratchet" : "smooth"));
  line(fmt::format("  pitch_mm: {}", num(t.pitch * 1e3)));
  line(fmt::format("  tooth_height_mm: {}", num(t.tooth_height * 1e3)));
  line(fmt::format("  mu_forward: {}", num(t.mu_forward)));
  line(fmt::format("  mu_backward: {}", num(t.mu_backward)));
  if (t.confinement.empty()) {
    line("  confinement: []");
  } else {
    line("  confinement:");
    for (const auto& c : t.confinement) {
      std::string item = fmt::format("    - {{x_begin_mm: {}, x_end_mm: {}", num(c.x_begin * 1e3),
                                     num(c.x_end * 1e3));
      if (c.gap) item += fmt::format(", gap_mm: {}", num(*c.gap * 1e3));
      if (c.width) item += fmt::format(", width_mm: {}", num(*c.width * 1e3));
      line(item + "}");
    }
  }
  if (s.confined_control) {
    line("confined_control:");
    line(fmt::format("  mask: {}", to_string(s.confined_control->mask)));
    if (s.confined_control->i_high) {
      line(fmt::format("  i_high_a: {}", num(*s.confined_control->i_high)));
    }
  }
  line(fmt::format("payload_g: {}", num(s.payload_mass * 1e3)));
  line(fmt::format("duration_s: {}", num(s.duration)));
  line(fmt::format("dt_s: {}", num(s.dt)));
  line(fmt::format("seed: {}", s.seed));
  return o;
}

void write_config(const Config& config, const std::filesystem::path& path) {
  const std::string text = format_config(config);
  std::ofstream out(path);
  if (!out) throw ConfigError(fmt::format("{}: cannot write config", path.string()));
  out << text;
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

std::string config_digest(const Config& config) { return fnv1a_hex(format_config(config)); }

}  // namespace ccpj::io
