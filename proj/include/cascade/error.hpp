#pragma once

#include <stdexcept>
#include <string>

namespace cascade {

// Base for every error raised by the library. Callers that only care about
// "something in the pipeline rejected the input" catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A precondition on user-supplied data was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Two objects that must share a spatial grid do not.
class GridMismatch : public Error {
 public:
  using Error::Error;
};

// A numerical routine could not produce a trustworthy result.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// The quadrature nodes handed to an integrator are too coarse.
class QuadratureResolutionError : public Error {
 public:
  QuadratureResolutionError(const std::string& what, double required_spacing)
      : Error(what), required_spacing_(required_spacing) {}

  double required_spacing() const { return required_spacing_; }

 private:
  double required_spacing_;
};

}  // namespace cascade
