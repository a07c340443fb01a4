#pragma once

#include <stdexcept>
#include <string>

namespace qgs {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Operation requires an invertible covariance but g sits at the g = 1 limit.
class DegenerateError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Base for results that could not be computed or certified numerically.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CertificationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ConvergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Cancellation left fewer surviving digits than required.
class PrecisionLossError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class OverflowError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SingularMatrixError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A truncated distribution does not carry enough mass for the requested quantity.
class TruncationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Wavepacket marginal below the configured floor; correlation is undefined.
class UnderflowError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ParameterMismatchError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qgs
