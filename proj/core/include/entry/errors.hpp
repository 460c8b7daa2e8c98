#pragma once

#include <stdexcept>
#include <string>

namespace entry {

/// Argument outside the validity range of a model (altitude, angle of attack, Mach).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A division by a vanishing quantity (chi, Jacobian denominators, dV/dtau).
class SingularityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Lookup outside the tabulated range.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// The reference planner could not build a feasible profile.
class PlanningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Propagation reached a state where the equations of motion are no longer valid.
class TerminationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Configuration parse, schema or range failure. `what()` names the field path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A required input artifact (reference CSV, metrics CSV) is missing.
class DependencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace entry
