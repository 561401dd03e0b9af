#pragma once

#include <stdexcept>
#include <string>

namespace qstomo {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Caller broke a documented precondition between values (mismatched frames, grids).
class ContractError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class AliasingError : public Error {
 public:
  AliasingError(const std::string& what, double time, double fraction)
      : Error(what), time_(time), fraction_(fraction) {}
  double time() const { return time_; }
  double fraction() const { return fraction_; }

 private:
  double time_;
  double fraction_;
};

class IoError : public Error {
 public:
  IoError(const std::string& what, std::string path) : Error(what + ": " + path), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace qstomo
