/// @file errors.hpp
/// Exception taxonomy shared by all modules. Invalid arguments use
/// std::invalid_argument directly; everything else gets a named type so
/// callers can react to the failure class, not the message text.
#pragma once

#include <stdexcept>
#include <string>

namespace fsi {

/// A queried point lies outside the covered domain.
struct OutOfDomainError : std::runtime_error {
  explicit OutOfDomainError(const std::string& what) : std::runtime_error(what) {}
};

/// Geometric construction failed (degenerate curve, curve touching the
/// boundary, non-nested refinement, ...).
struct GeometryError : std::runtime_error {
  explicit GeometryError(const std::string& what) : std::runtime_error(what) {}
};

/// Direct factorization reported a structurally or numerically singular matrix.
struct SingularSystemError : std::runtime_error {
  explicit SingularSystemError(const std::string& what) : std::runtime_error(what) {}
};

/// An iterative kernel exhausted its iteration budget before meeting tolerance.
struct ConvergenceError : std::runtime_error {
  explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

/// Configuration file or override rejected; carries the 1-based line number
/// when the offending text came from a file (0 for command-line overrides).
struct ConfigError : std::runtime_error {
  int line = 0;
  ConfigError(const std::string& what, int line_no)
      : std::runtime_error(line_no > 0 ? "line " + std::to_string(line_no) + ": " + what
                                       : what),
        line(line_no) {}
};

}  // namespace fsi
