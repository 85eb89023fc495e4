#pragma once

#include <stdexcept>
#include <string>

namespace strb {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rejected input: bad dimensions, degenerate geometry, out-of-range indices.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A factorization or solve failed (singular step matrix, indefinite Gramian).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A persisted model could not be read or does not match this build.
class ModelError : public Error {
 public:
  using Error::Error;
};

/// Throws InvalidArgument with `what` unless `condition` holds.
void require(bool condition, const std::string& what);

}  // namespace strb
