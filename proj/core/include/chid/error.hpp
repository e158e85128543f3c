#pragma once

#include <stdexcept>
#include <string>

namespace chid {

/// Base class of all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid input: bad configuration values, inconsistent grids, data outside
/// the admissible range.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed: Newton divergence, CG stagnation, loss of
/// positive definiteness.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace chid
