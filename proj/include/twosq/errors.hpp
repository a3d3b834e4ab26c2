#pragma once

#include <stdexcept>
#include <string>

namespace twosq {

/// Bad arguments or a violated precondition. CLI exit code 2.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The input lacks data the operation needs (e.g. a report without a joint
/// histogram). CLI exit code 3.
class CapabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An internal invariant failed: counter overflow, impossible degenerate
/// case, a runtime identity that should hold exactly. CLI exit code 4.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Floating-point evaluation left its valid range.
class NumericalError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw InputError(what);
}

inline void ensure(bool ok, const std::string& what) {
  if (!ok) throw InvariantError(what);
}

}  // namespace detail
}  // namespace twosq
