#pragma once

#include <stdexcept>
#include <string>

namespace geodex {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Point left the chart (sphere poles, invalid coordinates).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Requested accuracy not reachable at the given discretization.
class AccuracyError : public Error {
 public:
  using Error::Error;
};

/// Degenerate critical point / singular Newton system / nonzero nullity.
class DegeneracyError : public Error {
 public:
  using Error::Error;
};

/// Frame construction failure (holonomy not orthogonal, log branch failure).
class FrameError : public Error {
 public:
  using Error::Error;
};

/// Operator assembly inconsistency (asymmetry, boundary mismatch).
class AssemblyError : public Error {
 public:
  using Error::Error;
};

/// Crossing form or crossing operator is singular at a crossing.
class RegularityError : public Error {
 public:
  using Error::Error;
};

/// Feature cannot be resolved at the current grid resolution.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

/// Path endpoint lies on the Maslov cycle.
class AdmissibilityError : public Error {
 public:
  using Error::Error;
};

/// Quadratic form has an eigenvalue inside the zero tolerance.
class DegenerateFormError : public Error {
 public:
  using Error::Error;
};

/// Invalid parameter combination (e.g. kappa <= sqrt(pi)).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Invalid or inconsistent run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Unexpected numerical failure (eigensolver, winding near zero).
class NumericsError : public Error {
 public:
  using Error::Error;
};

/// Supplied callbacks fail the finite-difference consistency check.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

}  // namespace geodex
