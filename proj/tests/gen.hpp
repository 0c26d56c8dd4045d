#pragma once

// Small seeded generators for property tests. Every suite draws from its own
// fixed seed so failures replay exactly.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "ccpj/core/calibration_table.hpp"
#include "ccpj/kinematics/stroke.hpp"

namespace ccpj::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }

  /// Valid stroke: 0 <= alpha <= beta <= 60 deg.
  kinematics::StrokeGeometry stroke() {
    kinematics::StrokeGeometry g;
    g.leg_length = uniform(10e-3, 200e-3);
    const double a = uniform(0.0, kinematics::kMaxContactAngle);
    const double b = uniform(0.0, kinematics::kMaxContactAngle);
    g.alpha = std::min(a, b);
    g.beta = std::max(a, b);
    g.period = uniform(0.5, 20.0);
    return g;
  }

  /// Valid table with 2..12 points.
  std::vector<TablePoint> valid_table() {
    std::vector<TablePoint> pts;
    const int n = integer(2, 12);
    double c = uniform(0.0, 0.1), v = uniform(0.0, 5.0);
    for (int i = 0; i < n; ++i) {
      pts.push_back({c, v});
      c += uniform(1e-3, 0.1);
      if (coin(0.8)) v += uniform(0.0, 10.0);
    }
    return pts;
  }

  /// Arbitrary table, valid or not: random sizes, orderings and signs.
  std::vector<TablePoint> any_table() {
    std::vector<TablePoint> pts;
    const int n = integer(0, 8);
    for (int i = 0; i < n; ++i) {
      // Coarse values so ties in current and value occur often.
      pts.push_back({integer(0, 6) * 0.05, integer(-1, 6) * 1.0});
    }
    return pts;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("ccpj_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::filesystem::path source_dir() { return CCPJ_SOURCE_DIR; }

}  // namespace ccpj::testing
