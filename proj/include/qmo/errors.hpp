#pragma once

#include <stdexcept>
#include <string>

namespace qmo {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ShapeMismatch : Error {
  using Error::Error;
};

struct DivisionByZero : Error {
  using Error::Error;
};

struct ConvergenceFailure : Error {
  using Error::Error;
};

struct InvalidRank : Error {
  using Error::Error;
};

struct NonFinite : Error {
  using Error::Error;
};

struct NotDifferentiable : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace qmo
