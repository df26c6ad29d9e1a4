#pragma once

#include <stdexcept>
#include <string>

namespace fnls {

/// Bad user input: shapes, parameter ranges, config values.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation could not produce a trustworthy result (non-convergence,
/// non-finite values, conservation breakdown).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File system or serialization failure.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fnls
