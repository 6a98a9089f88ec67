#include <cmath>

#include "sslab/core/error.hpp"
#include "sslab/core/format.hpp"
#include "sslab/drift/drift_field.hpp"

namespace sslab::drift {

double p_critical(double delta) {
  require(delta > 0.0, ErrorCode::invalid_parameter, "p_critical needs delta > 0");
  require(delta < 4.0, ErrorCode::out_of_range, "p_critical needs delta < 4, got " + fmt(delta));
  return 2.0 / (2.0 - std::sqrt(delta));
}

std::optional<LpsExponents> lps_exponents(const DriftField& field) { return field.lps(); }

}  // namespace sslab::drift
