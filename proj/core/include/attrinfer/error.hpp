#pragma once

#include <stdexcept>
#include <string>

namespace attrinfer {

// Every failure raised by the library derives from Error. The category decides
// the process exit code used by the command-line tool.
enum class ErrorCategory { configuration, data, numerical };

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

// Operand shapes do not agree.
class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what) : Error(ErrorCategory::configuration, what) {}
};

// Invalid run configuration (ratios, modes, empty partitions, ...).
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorCategory::configuration, what) {}
};

// Malformed input file.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error(ErrorCategory::data, what) {}
};

// Data that violates the attribute schema, or a checkpoint for a different schema.
class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& what) : Error(ErrorCategory::data, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCategory::data, what) {}
};

// Argument outside a function's domain (e.g. log of a non-positive entry).
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorCategory::numerical, what) {}
};

// NaN/Inf or otherwise unusable numbers.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorCategory::numerical, what) {}
};

inline int exit_code(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::configuration:
      return 2;
    case ErrorCategory::data:
      return 3;
    case ErrorCategory::numerical:
      return 4;
  }
  return 1;
}

}  // namespace attrinfer
