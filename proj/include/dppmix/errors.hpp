#pragma once

#include <stdexcept>
#include <string>

namespace dppmix {

// Exit codes used by the command line front end.
enum class ErrorKind { Config = 1, Data = 2, Numerical = 3 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Invalid model or hyper parameters (rho <= 0, eps >= s, ...).
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what)
      : Error(ErrorKind::Config, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
      : Error(ErrorKind::Config, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what)
      : Error(ErrorKind::Numerical, what) {}
};

}  // namespace dppmix
