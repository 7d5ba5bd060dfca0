#pragma once

#include <stdexcept>
#include <string>

namespace hele_shaw {

/// Base class for every failure raised by the simulator. Each subclass maps
/// onto one process exit code of the command-line front end.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 3; }
};

/// Newton iteration on the closure constraint did not converge.
class ClosureFailure : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
};

/// Linear or fixed-point solver left its convergence regime.
class SolverFailure : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
};

/// Self-intersection guard, wall-distance guard, or degenerate area.
class GeometryFailure : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 4; }
};

class ConfigError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

}  // namespace hele_shaw
