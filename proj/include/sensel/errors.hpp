#pragma once

#include <stdexcept>
#include <string>

namespace sensel {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Shapes of the inputs do not line up (row/vector dimensions, budgets).
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// Invalid argument outside of dimension problems (bad budget, odd m, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The selected information matrix is not positive definite. Carries the
/// offending Cholesky pivot so callers can report how singular it was.
class SingularInformation : public Error {
 public:
  SingularInformation(const std::string& msg, double pivot)
      : Error(msg), pivot_(pivot) {}
  double pivot() const { return pivot_; }

 private:
  double pivot_;
};

/// Relative gap requested against a near-zero reference value.
class DegenerateReference : public Error {
 public:
  using Error::Error;
};

/// Barrier objective evaluated on or outside the open box (0,1)^m.
class BoundaryViolation : public Error {
 public:
  using Error::Error;
};

/// The barrier solver exhausted its iteration budget without reaching
/// the stationarity tolerance.
class NonConvergence : public Error {
 public:
  using Error::Error;
};

/// The Newton KKT system could not be factorized.
class SingularKkt : public Error {
 public:
  using Error::Error;
};

/// A measurement row with zero norm where a normalization is required.
class ZeroRow : public Error {
 public:
  using Error::Error;
};

}  // namespace sensel
