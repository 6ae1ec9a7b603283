#pragma once

#include <stdexcept>
#include <string>

namespace mmot {

/// Base class for failures raised by the library itself (as opposed to
/// argument validation, which uses std::invalid_argument).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// No plan with the requested structure exists (for example a point with no
/// finite-cost partner, or a block schedule that cannot be built at this n).
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// An iterative method stopped before reaching its tolerance.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace mmot
