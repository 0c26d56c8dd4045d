#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "ccpj/core/calibration_table.hpp"
#include "ccpj/gait/model.hpp"

namespace ccpj::io {

inline constexpr int kSchemaVersion = 1;

/// A resolved parameter set or scenario.
///
/// Files are YAML with the unit in every dimensional key (`period_s`,
/// `gap_mm`, `payload_g`). Each file carries `schema_version` and may name a
/// `base:` file, relative to itself, whose values it overrides key by key.
///
///   schema_version: 1
///   base: ../tripodbot.default
///   name: gate40
///   signal: {period_s: 4}
///   terrain:
///     confinement:
///       - {x_begin_mm: 100, x_end_mm: 130, gap_mm: 40}
///
/// Unknown keys are errors, so misspelled units do not pass silently.
struct Config {
  std::string name;
  gait::Scenario scenario;
  CalibrationTable stiffness = default_stiffness_table();
};

/// Throws ConfigError naming the field and line of the first problem.
Config load_config(const std::filesystem::path& path);

/// As load_config, for text already in memory. `base:` paths resolve against
/// `dir`.
Config parse_config(const std::string& text, const std::string& origin = "<memory>",
                    const std::filesystem::path& dir = {});

/// Complete, self-contained YAML for a config (no `base:`). Parsing the
/// output reproduces the config up to decimal rounding of unit conversions.
std::string format_config(const Config& config);

void write_config(const Config& config, const std::filesystem::path& path);

/// 64-bit FNV-1a hash, as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

/// Digest identifying a resolved config, taken over its canonical text.
std::string config_digest(const Config& config);

}  // namespace ccpj::io
