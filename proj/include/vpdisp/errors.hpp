#pragma once

#include <stdexcept>
#include <string>

namespace vpdisp {

/// Argument outside the domain of an operation (negative radius, q < 1, ...).
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// A particle reached r <= 0 where the equations of motion are singular.
struct SingularityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Step rejection drove the step size below the configured floor.
struct StiffnessError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Integration failure with the simulation time at which it happened.
class NumericalFailure : public std::runtime_error {
 public:
  NumericalFailure(const std::string& what, double time)
      : std::runtime_error(what + " (t = " + std::to_string(time) + ")"), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

}  // namespace vpdisp
