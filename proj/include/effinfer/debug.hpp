#pragma once

#include <stdexcept>

namespace effinfer {

/// True when INFER_DEBUG=1 was set at first use. Enables the lockstep and
/// address-uniqueness assertions.
bool debug_checks_enabled();

/// Overrides the environment, for tests.
void set_debug_checks(bool enabled);

/// A debug-mode structural assertion failed (duplicate address, particles
/// out of lockstep).
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace effinfer
