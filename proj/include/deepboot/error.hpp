#pragma once

#include <stdexcept>
#include <string>

namespace deepboot {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes disagree, or a batch is empty.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A model or config value violates its invariants. `path` names the offending
// field (e.g. "optimizer.momentum") when one is known.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what, std::string path = {})
      : Error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

// Non-finite values surfaced during training or evaluation.
class NumericalAbort : public Error {
 public:
  using Error::Error;
};

}  // namespace deepboot
