#pragma once

#include <stdexcept>
#include <string>

namespace urnsa {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed arguments: wrong shapes, out-of-range parameters.
class InputError : public Error {
 public:
  using Error::Error;
};

/// An iterative kernel stopped before reaching its tolerance.
class IterationLimitError : public Error {
 public:
  IterationLimitError(const std::string& what, double last_residual)
      : Error(what), residual_(last_residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class UnsupportedSizeError : public Error {
 public:
  using Error::Error;
};

/// A matrix that must be stable (spectrum in the open right half-plane) is not.
class StabilityError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class SingularityError : public Error {
 public:
  using Error::Error;
};

/// Column means of the addition rule do not share a common sum.
class BalanceError : public Error {
 public:
  using Error::Error;
};

/// The urn weight reached zero.
class ExtinctionError : public Error {
 public:
  using Error::Error;
};

/// A removal step would leave a negative ball mass.
class TenabilityError : public Error {
 public:
  using Error::Error;
};

/// Exact enumeration refused because the tree would be too large.
class OracleSizeError : public Error {
 public:
  using Error::Error;
};

/// Invalid run configuration (schema or value errors).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace urnsa
