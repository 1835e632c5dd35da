#pragma once

#include <stdexcept>
#include <string>

namespace cepc {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct NonSquareAPCount : ConfigError {
  using ConfigError::ConfigError;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

struct LengthMismatch : Error {
  using Error::Error;
};

struct FactorizationFailure : Error {
  using Error::Error;
};

struct EmptyInput : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

struct MissingManifest : IoError {
  using IoError::IoError;
};

}  // namespace cepc
