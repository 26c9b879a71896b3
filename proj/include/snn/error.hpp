#pragma once

#include <stdexcept>
#include <string>

namespace snn {

/// Broad failure category. The C API and the CLI map these onto status and
/// exit codes, so every exception thrown by the library carries one.
enum class ErrorKind {
  kUsage,    // bad arguments or configuration
  kData,     // unreadable or malformed input data
  kNumeric,  // non-finite values, empty statistics, undefined quantities
  kModel,    // incompatible model, corrupt checkpoint
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what)
      : Error(ErrorKind::kModel, what) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what)
      : Error(ErrorKind::kUsage, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what)
      : Error(ErrorKind::kNumeric, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what)
      : Error(ErrorKind::kData, what) {}
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what)
      : Error(ErrorKind::kModel, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
      : Error(ErrorKind::kUsage, what) {}
};

}  // namespace snn
