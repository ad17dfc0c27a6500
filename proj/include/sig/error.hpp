#pragma once

#include <stdexcept>
#include <string>

namespace sig {

// Base for every error raised by the library. The CLI maps the subclasses
// onto exit codes: usage 1, numerical 2, I/O 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Incompatible tensor shapes or network widths.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Invalid argument or configuration value supplied by a caller.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Non-finite values, domain violations, solver non-convergence.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace sig
