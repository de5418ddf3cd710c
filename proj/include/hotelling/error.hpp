#pragma once

#include <stdexcept>
#include <string>

namespace hotelling {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid construction input: bad bounds, non-metric distance data, bad densities.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A restricted action set C(rho, Theta, K) that is empty.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// Broken internal invariant (e.g. a bisection that failed to bracket).
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace hotelling
