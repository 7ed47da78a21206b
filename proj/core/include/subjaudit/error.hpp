#pragma once

#include <stdexcept>
#include <string>

namespace subjaudit {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Reading or writing a file failed, or its contents are malformed.
class IoError : public Error {
 public:
  using Error::Error;
};

/// The audit configuration is incomplete or inconsistent.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace subjaudit
