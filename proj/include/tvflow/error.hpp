#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tvflow {

enum class ErrorCode {
  InvalidArgument,
  InvalidWeight,
  InvalidExponent,
  Geometry,
  DegenerateGeometry,
  Domain,
  InvariantViolation,
  NotApplicable,
  Convergence,
  NonMonotone,
  Schema,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::InvalidWeight: return "invalid-weight";
    case ErrorCode::InvalidExponent: return "invalid-exponent";
    case ErrorCode::Geometry: return "geometry";
    case ErrorCode::DegenerateGeometry: return "degenerate-geometry";
    case ErrorCode::Domain: return "domain";
    case ErrorCode::InvariantViolation: return "invariant-violation";
    case ErrorCode::NotApplicable: return "not-applicable";
    case ErrorCode::Convergence: return "convergence";
    case ErrorCode::NonMonotone: return "non-monotone";
    case ErrorCode::Schema: return "schema";
  }
  return "unknown";
}

/// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace tvflow
