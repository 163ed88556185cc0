#pragma once

#include <stdexcept>
#include <string>

namespace crowdcal {

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidDimensionError : Error {
  using Error::Error;
};

struct ArithmeticError : Error {
  using Error::Error;
};

// Non-finite branch condition; message names sample id and site id.
struct TraceError : Error {
  using Error::Error;
};

struct InvalidConfigError : Error {
  using Error::Error;
};

struct EstimationError : Error {
  using Error::Error;
};

struct InsufficientDataError : Error {
  using Error::Error;
};

struct SimulationError : Error {
  using Error::Error;
};

struct InvalidDistributionError : Error {
  using Error::Error;
};

struct InvalidInputError : Error {
  using Error::Error;
};

}  // namespace crowdcal
