#pragma once

#include <stdexcept>
#include <string>

namespace ddt {

/// Base exception for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by the config parser. Line and column are 1-based; 0 means
/// the error is semantic and not tied to a source position.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& message, int line = 0, int column = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ", column " +
                             std::to_string(column) + ": " + message
                       : message),
        line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

/// Raised when an external implementation violates the wire protocol.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

}  // namespace ddt
