#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace wsrctrl {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inconsistent shapes or malformed inputs to a kernel.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Invalid user configuration (bad family name, negative stddev, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Base for failures of the numerics themselves.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class EigenFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// A value that must be finite was not; `index` names the offending sample
// (or step) when one exists.
class NonFiniteValue : public NumericalError {
 public:
  NonFiniteValue(const std::string& what, std::size_t index)
      : NumericalError(what), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

// E_w[B^T P B + R] left the positive definite cone.
class DomainViolation : public NumericalError {
 public:
  DomainViolation(const std::string& what, double min_eigenvalue)
      : NumericalError(what), min_eigenvalue_(min_eigenvalue) {}
  double min_eigenvalue() const { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

class WeightOverflow : public NumericalError {
 public:
  WeightOverflow(const std::string& what, double exponent)
      : NumericalError(what), exponent_(exponent) {}
  double exponent() const { return exponent_; }

 private:
  double exponent_;
};

class ConvergenceFailure : public NumericalError {
 public:
  ConvergenceFailure(const std::string& what, std::vector<double> history)
      : NumericalError(what), history_(std::move(history)) {}
  const std::vector<double>& history() const { return history_; }

 private:
  std::vector<double> history_;
};

class SingularJacobian : public NumericalError {
 public:
  SingularJacobian(const std::string& what, double rcond)
      : NumericalError(what), rcond_(rcond) {}
  double rcond() const { return rcond_; }

 private:
  double rcond_;
};

}  // namespace wsrctrl
