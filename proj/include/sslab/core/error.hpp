#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sslab {

enum class ErrorCode {
  invalid_dimension,
  invalid_parameter,
  out_of_range,
  certificate_failure,
  stability_violation,
  exponent_range,
  recipe_failure,
  grid_mismatch,
  degenerate,
  io_failure,
  config_error,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Base exception for every recoverable failure raised by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised when a Rayleigh quotient cannot be formed; carries the offending quotient.
class CertificateFailure : public Error {
 public:
  CertificateFailure(const std::string& what, double quotient);
  [[nodiscard]] double quotient() const noexcept { return quotient_; }

 private:
  double quotient_;
};

/// Explicit time stepping refused; `suggested_tau()` is a stable step.
class StabilityViolation : public Error {
 public:
  StabilityViolation(const std::string& what, double suggested_tau);
  [[nodiscard]] double suggested_tau() const noexcept { return suggested_tau_; }

 private:
  double suggested_tau_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) fail(code, what);
}

}  // namespace sslab
