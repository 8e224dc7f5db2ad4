#ifndef MGRID_ERROR_HPP_
#define MGRID_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace mgrid {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid geometry or argument: non-increasing grid, size mismatch, bad N.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Zero pivot, failed bracket, iteration cap, non-finite result.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A local CFL number (or the sqrt(1+theta)*C bound) exceeds one.
class CflError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Total depth fell below the dry-state threshold.
class DryStateError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Malformed or out-of-range experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace mgrid

#endif  // MGRID_ERROR_HPP_
