#pragma once

#include <stdexcept>
#include <string>

namespace linbai {

// Inputs whose shapes do not agree.
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Parameter sits on a tie / threshold boundary, so the answer is not unique.
struct DegenerateParameterError : std::domain_error {
  using std::domain_error::domain_error;
};

// Halfspace {<lambda,y> >= x} is empty (y = 0, x > 0).
struct InfeasibleHalfspaceError : std::domain_error {
  using std::domain_error::domain_error;
};

// Caller violated a documented precondition.
struct PreconditionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Bad configuration, instance file, or sampler/problem combination.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Internal cross-check failed (solver disagreement, broken invariant).
struct ConsistencyError : std::logic_error {
  using std::logic_error::logic_error;
};

}  // namespace linbai
