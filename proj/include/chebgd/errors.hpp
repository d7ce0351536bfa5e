#pragma once

#include <stdexcept>
#include <string>

namespace chebgd {

/// Base class of every error thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// -- numerical failures (CLI exit code 4) ------------------------------------

struct NonConvergence : Error {
  using Error::Error;
};

/// Shifted power iteration found a numerically zero matrix (A ~ lambda*I).
struct DegenerateShift : Error {
  using Error::Error;
};

/// lambda_min >= lambda_max where a proper spectral interval is required.
struct DegenerateSpectrum : Error {
  using Error::Error;
};

struct SingularSystem : Error {
  using Error::Error;
};

// -- input contract violations (CLI exit code 2) ------------------------------

struct DimensionMismatch : Error {
  using Error::Error;
};

struct ShapeMismatch : Error {
  using Error::Error;
};

struct ScheduleEmpty : Error {
  using Error::Error;
};

struct SizeLimitExceeded : Error {
  using Error::Error;
};

struct InvalidParams : Error {
  using Error::Error;
};

// -- data / file problems (CLI exit code 3) -----------------------------------

struct ParseError : Error {
  using Error::Error;
};

struct EmptyAfterCleaning : Error {
  using Error::Error;
};

struct IOError : Error {
  using Error::Error;
};

}  // namespace chebgd
