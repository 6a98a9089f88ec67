#include "sslab/core/error.hpp"

namespace sslab {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_dimension: return "invalid-dimension";
    case ErrorCode::invalid_parameter: return "invalid-parameter";
    case ErrorCode::out_of_range: return "out-of-range";
    case ErrorCode::certificate_failure: return "certificate-failure";
    case ErrorCode::stability_violation: return "stability-violation";
    case ErrorCode::exponent_range: return "exponent-range";
    case ErrorCode::recipe_failure: return "constant-recipe-failure";
    case ErrorCode::grid_mismatch: return "grid-mismatch";
    case ErrorCode::degenerate: return "degenerate";
    case ErrorCode::io_failure: return "io-failure";
    case ErrorCode::config_error: return "config-error";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

CertificateFailure::CertificateFailure(const std::string& what, double quotient)
    : Error(ErrorCode::certificate_failure, what), quotient_(quotient) {}

StabilityViolation::StabilityViolation(const std::string& what, double suggested_tau)
    : Error(ErrorCode::stability_violation, what), suggested_tau_(suggested_tau) {}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace sslab
