#pragma once

#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace nbvs {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user input: bad configuration, malformed files, violated
/// preconditions on data. The CLI maps these to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Numerical breakdown (non-PD factorizations, runaway rejection loops).
/// The CLI maps these to exit code 3.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class ConstantColumnError : public ConfigError {
 public:
  explicit ConstantColumnError(std::size_t column)
      : ConfigError("column " + std::to_string(column) +
                    " has zero sample variance"),
        column_(column) {}
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t column_;
};

class FactorizationError : public NumericalError {
 public:
  explicit FactorizationError(std::vector<std::size_t> included)
      : NumericalError(describe(included)), included_(std::move(included)) {}
  const std::vector<std::size_t>& included() const noexcept {
    return included_;
  }

 private:
  static std::string describe(const std::vector<std::size_t>& idx) {
    std::ostringstream os;
    os << "posterior precision is not positive definite for model {";
    for (std::size_t i = 0; i < idx.size(); ++i) os << (i ? " " : "") << idx[i];
    os << "}";
    return os.str();
  }
  std::vector<std::size_t> included_;
};

class RejectionLimitError : public NumericalError {
 public:
  explicit RejectionLimitError(double r2)
      : NumericalError("lambda rejection sampler exceeded its candidate limit "
                       "(r^2 = " + std::to_string(r2) + ")") {}
};

}  // namespace nbvs
