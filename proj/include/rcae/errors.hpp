#pragma once

#include <stdexcept>
#include <string>

namespace rcae {

// Base for everything this library throws on purpose.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A matrix handed in as a rotation is too far from orthonormal to repair.
struct NotOrthonormal : Error {
  using Error::Error;
};

// uncross() was given a matrix with a significant symmetric part.
struct NotSkew : Error {
  using Error::Error;
};

// Geometry too close to singular to produce a meaningful answer
// (rank-deficient projection input, parallel reference vectors, ...).
struct Degenerate : Error {
  using Error::Error;
};

// The innovation block of a least-squares or filter update is numerically
// singular; the estimator cannot continue safely.
struct SingularInnovation : Error {
  using Error::Error;
};

// An orientation sits at the pitch singularity of the 3-2-1 Euler chart
// in a context that cannot represent it.
struct GimbalLock : Error {
  using Error::Error;
};

// A config file or command line option is invalid.
struct ConfigError : Error {
  using Error::Error;
};

// An input data file is malformed; message names the offending row.
struct MalformedRecord : Error {
  using Error::Error;
};

}  // namespace rcae
