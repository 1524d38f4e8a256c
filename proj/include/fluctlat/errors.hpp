#pragma once

#include <stdexcept>
#include <string>

namespace fluctlat {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error { using Error::Error; };
/// Data that violates a type invariant (negative rate, bad profile value).
class ValidationError : public Error { using Error::Error; };
/// Array or table of the wrong length.
class ShapeError : public Error { using Error::Error; };
/// Inconsistent configuration (CFL violation, missing keys, ...).
class ConfigError : public Error { using Error::Error; };
/// Grids that must share geometry do not.
class GridMismatchError : public Error { using Error::Error; };
/// Problem too large for a dense oracle.
class CapacityError : public Error { using Error::Error; };
/// Event log that cannot have been produced by the stated dynamics.
class ConsistencyError : public Error { using Error::Error; };
/// Local-average window smaller than the observable support.
class WindowError : public Error { using Error::Error; };
/// Counter identity broken: particle bookkeeping is corrupted.
class BookkeepingError : public Error { using Error::Error; };

/// File could not be read or written.
class IoError : public Error { using Error::Error; };

/// Floating-point failure: blow-up, NaN, values escaping [0,1].
class NumericalError : public Error {
public:
  NumericalError(const std::string& what, long step = -1) : Error(what), step_(step) {}
  long step() const noexcept { return step_; }

private:
  long step_;
};

/// Density touches 0 or 1 where a division by the conductivity is needed.
class SingularityError : public NumericalError { using NumericalError::NumericalError; };
/// Reaction current of a sign the rates cannot produce (Phi = +inf).
class InfeasibilityError : public NumericalError { using NumericalError::NumericalError; };
/// Newton iteration failed on a time slice.
class IterationError : public NumericalError { using NumericalError::NumericalError; };

}  // namespace fluctlat
