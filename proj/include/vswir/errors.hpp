#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vswir {

/// Base for all library errors. The CLI maps subclasses onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Query outside the lookup-table domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Forward-model denominator 1 - s*r reached zero or went negative.
class SingularityError : public Error {
 public:
  SingularityError(std::size_t channel, double denominator)
      : Error("forward model singular at channel " + std::to_string(channel) +
              " (1 - s*r = " + std::to_string(denominator) + ")"),
        channel_(channel) {}
  std::size_t channel() const { return channel_; }

 private:
  std::size_t channel_;
};

/// Cholesky failed or a matrix was not symmetric.
class FactorizationError : public Error {
 public:
  using Error::Error;
};

/// Malformed input data, files, or arguments.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Optimizer could not make progress.
class DivergedError : public Error {
 public:
  using Error::Error;
};

}  // namespace vswir
