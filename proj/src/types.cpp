#include "bufmanet/types.hpp"

#include <cmath>

namespace bufmanet {

std::string_view to_string(Mac mac) { return mac == Mac::LS ? "LS" : "EC"; }

std::string_view to_string(Mobility mobility) {
  return mobility == Mobility::IID ? "IID" : "RW";
}

Mac parse_mac(std::string_view text) {
  if (text == "LS" || text == "ls") return Mac::LS;
  if (text == "EC" || text == "ec") return Mac::EC;
  throw ParameterError("unknown MAC '" + std::string(text) + "' (expected LS or EC)");
}

Mobility parse_mobility(std::string_view text) {
  if (text == "IID" || text == "iid") return Mobility::IID;
  if (text == "RW" || text == "rw") return Mobility::RW;
  throw ParameterError("unknown mobility '" + std::string(text) + "' (expected IID or RW)");
}

void NetworkParams::validate() const {
  if (n < 4) throw ParameterError("n must be at least 4, got " + std::to_string(n));
  if (m < 1) throw ParameterError("m must be at least 1, got " + std::to_string(m));
  if (source_buffer < 1)
    throw ParameterError("Bs must be at least 1, got " + std::to_string(source_buffer));
  if (relay_buffer < 0)
    throw ParameterError("Br must be non-negative, got " + std::to_string(relay_buffer));
  if (!(lambda > 0.0 && lambda <= 1.0))
    throw ParameterError("lambda_s must lie in (0, 1], got " + std::to_string(lambda));
  if (mac == Mac::EC) {
    if (nu < 1) throw ParameterError("nu must be at least 1, got " + std::to_string(nu));
    if (!(delta >= 0.0) || !std::isfinite(delta))
      throw ParameterError("delta must be a finite non-negative number");
    const long side = 2L * nu - 1;
    if (side * side > static_cast<long>(m) * m)
      throw ParameterError("EC coverage (2nu-1)^2 exceeds the m*m network");
  }
}

void SchedProbs::validate() const {
  for (double p : {psd, psr, prd}) {
    if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("scheduling probability outside [0, 1]");
  }
  if (psd + psr + prd > 1.0 + 1e-12)
    throw ParameterError("psd + psr + prd exceeds 1");
  // The relay occupancy law relies on symmetric relay in/out chances.
  if (std::abs(psr - prd) > 1e-12) throw ParameterError("psr and prd must be equal");
}

}  // namespace bufmanet
