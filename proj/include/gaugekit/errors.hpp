// gaugekit: gauge and perspective duality toolkit
// Licensed under the Apache License, Version 2.0

#pragma once

#include <stdexcept>
#include <string>

namespace gaugekit {

/// Base class for all gaugekit exceptions.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument values: nonpositive tolerances, negative radii,
/// step sizes violating a stability bound, malformed specs.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A request that is well posed mathematically but outside the set of
/// structures this library handles in closed form.
class CapabilityError : public Error {
 public:
  using Error::Error;
};

/// Mismatched vector/matrix dimensions.
class DimensionError : public Error {
 public:
  using Error::Error;
};

inline void require_param(bool ok, const std::string& msg) {
  if (!ok) throw ParameterError(msg);
}

inline void require_dim(bool ok, const std::string& msg) {
  if (!ok) throw DimensionError(msg);
}

}  // namespace gaugekit
