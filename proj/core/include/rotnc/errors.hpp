#pragma once

#include <stdexcept>
#include <string>

namespace rotnc {

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Potential evaluated at (or numerically on top of) a centre.
struct CentreSingularityError : Error {
  int centre;
  CentreSingularityError(int k, const std::string& what) : Error(what), centre(k) {}
};

/// Winding number undefined: the path passes within the guard radius of a centre.
struct AmbiguousWindingError : Error {
  int centre;
  AmbiguousWindingError(int k, const std::string& what) : Error(what), centre(k) {}
};

struct AdmissibilityError : Error {
  using Error::Error;
};

struct NoConvergenceError : Error {
  using Error::Error;
};

struct ClassEscapeError : Error {
  using Error::Error;
};

}  // namespace rotnc
