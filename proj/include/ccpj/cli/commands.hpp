#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ccpj/io/artifacts.hpp"
#include "ccpj/io/config.hpp"

namespace ccpj::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kSimulationError = 3, kDataError = 4 };

/// `a:b:step` with a <= b and step > 0. The step doubles as the resolution for
/// `optimize`. Throws ConfigError when malformed or empty.
struct Range {
  double begin = 0.0;
  double end = 0.0;
  double step = 0.0;

  static Range parse(const std::string& text);
  /// begin, begin + step, ... up to end inclusive (within 1e-9 step).
  std::vector<double> values() const;
};

/// Raised by a command after it has written a report flagged partial.
class CommandFailed : public Error {
 public:
  CommandFailed(std::string message, int exit_code)
      : Error(std::move(message)), exit_code_(exit_code) {}
  int exit_code() const { return exit_code_; }

 private:
  int exit_code_;
};

io::RunReport cmd_simulate(const io::Config& config, const std::filesystem::path& out);

/// `param` is one of period [s], slope [deg], payload [g], current [A].
io::RunReport cmd_sweep(const io::Config& config, const std::string& param, const Range& range,
                        const std::filesystem::path& out);

/// Fits every calibrated parameter from the datasets in `data_dir` and writes
/// `tripodbot.calibrated` under `out`. Throws DataError listing any missing
/// dataset.
io::RunReport cmd_calibrate(const std::filesystem::path& data_dir, const io::Config& tmpl,
                            const std::filesystem::path& out);

/// `param` is period (fastest period within the range, default 2:10:0.05),
/// current (largest current fitting the tightest confinement) or mask (leg
/// mask with the least transit time).
io::RunReport cmd_optimize(const io::Config& config, const std::string& param,
                           const std::optional<Range>& range, const std::filesystem::path& out);

/// Figure-style bundle: displacement trace, speed over period, bend-test
/// stiffness over current and deployment over current.
io::RunReport cmd_report(const io::Config& config, const std::filesystem::path& out);

/// Dataset directory: $CCPJ_DATA_DIR when set, else the shipped data.
std::filesystem::path data_dir();

/// Full command line. Errors print one line `error[<kind>]: <message>` to
/// `err` and return 2 (config), 3 (simulation) or 4 (data).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ccpj::cli
