#pragma once

#include <stdexcept>
#include <string>

namespace qig {

// Base type for every error raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidInputError : Error { using Error::Error; };
struct NotPsdError : Error { using Error::Error; };
struct ResourceLimitError : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct NotFoundError : Error { using Error::Error; };
struct InconsistentTangentError : Error { using Error::Error; };
struct InvalidPovmError : Error { using Error::Error; };
struct InvalidFrameError : Error { using Error::Error; };
struct SingularMetricError : Error { using Error::Error; };
struct InfeasibleError : Error { using Error::Error; };
struct UnsupportedArityError : Error { using Error::Error; };
struct PreconditionError : Error { using Error::Error; };
struct InitializationError : Error { using Error::Error; };
struct SearchError : Error { using Error::Error; };

// Solver gave up before reaching its tolerance. Carries the best objective
// value reached, which for a minimization is still a valid upper estimate
// of the infimum.
struct ConvergenceError : Error {
  double best_value;
  ConvergenceError(const std::string& msg, double best)
      : Error(msg), best_value(best) {}
};

}  // namespace qig
