#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ccpj {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value object violated one of its invariants.
class ValidationError : public Error {
 public:
  enum class Kind {
    kTooFewPoints,
    kNonMonotoneCurrent,
    kNonMonotoneStiffness,
    kNegativeValue,
    kZeroDimension,
    kOutOfBounds,
    kInvalidParameter,
  };

  ValidationError(Kind kind, std::string message, std::optional<std::size_t> index = std::nullopt)
      : Error(std::move(message)), kind_(kind), index_(index) {}

  Kind kind() const { return kind_; }
  std::optional<std::size_t> index() const { return index_; }

 private:
  Kind kind_;
  std::optional<std::size_t> index_;
};

/// Query outside the domain of a table; tables never extrapolate.
class OutOfRange : public Error {
 public:
  using Error::Error;
};

class NoConvergence : public Error {
 public:
  NoConvergence(std::string message, std::vector<double> last_iterate, double gradient_norm,
                int iterations)
      : Error(std::move(message)),
        last_iterate_(std::move(last_iterate)),
        gradient_norm_(gradient_norm),
        iterations_(iterations) {}

  const std::vector<double>& last_iterate() const { return last_iterate_; }
  double gradient_norm() const { return gradient_norm_; }
  int iterations() const { return iterations_; }

 private:
  std::vector<double> last_iterate_;
  double gradient_norm_;
  int iterations_;
};

/// Requested speed lies beyond the largest stroke the legs can make.
class Unreachable : public Error {
 public:
  using Error::Error;
};

/// The robot cannot satisfy a ceiling or tunnel constraint.
class InfeasibleConfinement : public Error {
 public:
  InfeasibleConfinement(std::string message, double time = 0.0)
      : Error(std::move(message)), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

/// Unreadable or malformed dataset file.
class DataError : public Error {
 public:
  using Error::Error;
};

class EmptyDataset : public Error {
 public:
  using Error::Error;
};

class NoFeasibleFit : public Error {
 public:
  using Error::Error;
};

class SingularSystem : public Error {
 public:
  using Error::Error;
};

class NotUnimodal : public Error {
 public:
  using Error::Error;
};

class AllMasksInfeasible : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration or dataset file. Carries the offending field and
/// the 1-based line number when one is known.
class ConfigError : public Error {
 public:
  ConfigError(std::string message, std::string field = {}, int line = 0)
      : Error(std::move(message)), field_(std::move(field)), line_(line) {}
  const std::string& field() const { return field_; }
  int line() const { return line_; }

 private:
  std::string field_;
  int line_;
};

}  // namespace ccpj
