#pragma once

#include <stdexcept>
#include <string>

namespace adq {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad arguments or inputs that violate a documented precondition.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Malformed or truncated file contents.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Operating-system level failure opening, reading or writing a file.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

[[noreturn]] void throw_validation(const std::string& what);
[[noreturn]] void throw_format(const std::string& what);
[[noreturn]] void throw_io(const std::string& what);

}  // namespace adq
