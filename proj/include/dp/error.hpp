#pragma once

#include <stdexcept>
#include <string>

namespace dp {

// Error taxonomy mirrored by the CLI exit codes:
// config errors -> 2, data errors -> 3, numeric incidents -> 4.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
  public:
    using Error::Error;
};

class ConfigError : public Error {
  public:
    using Error::Error;
};

class DataError : public Error {
  public:
    using Error::Error;
};

class NumericError : public Error {
  public:
    using Error::Error;
};

class IoError : public Error {
  public:
    using Error::Error;
};

}  // namespace dp
