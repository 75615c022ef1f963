#pragma once

#include <stdexcept>
#include <string>

namespace bregpr {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// A solver produced a non-finite iterate.
class DivergedError : public Error
{
public:
  explicit DivergedError(int iteration)
      : Error("diverged at iteration " + std::to_string(iteration)),
        iteration_(iteration)
  {}

  int iteration() const noexcept { return iteration_; }

private:
  int iteration_;
};

} // namespace bregpr
