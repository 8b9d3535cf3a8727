#pragma once

#include <stdexcept>
#include <string>

namespace idp {

/// The constraint sets of a limiter problem do not intersect.
class InfeasibleProblem : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A splitting solve hit its iteration cap or produced non-finite values.
class SolverFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace idp
