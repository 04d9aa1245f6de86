#include "bufmanet/mac_models.hpp"

#include <algorithm>
#include <cmath>

namespace bufmanet {
namespace {

// (1 - p)^k evaluated as exp(k * log1p(-p)) to keep precision for large k.
double complement_pow(double p, int k) {
  if (k == 0) return 1.0;
  if (p >= 1.0) return 0.0;
  return std::exp(static_cast<double>(k) * std::log1p(-p));
}

void check_counts(int n, int m) {
  if (n < 4) throw ParameterError("n must be at least 4");
  if (m < 1) throw ParameterError("m must be at least 1");
}

}  // namespace

SchedProbs ls_mac_probs(int n, int m) {
  check_counts(n, m);
  const double cells = static_cast<double>(m) * m;
  const double nd = n;
  const double q_n1 = complement_pow(1.0 / cells, n - 1);

  // m^2/n - (m^2-1)/(n-1) folded into one fraction to avoid cancellation.
  const double psd = (nd - cells) / (nd * (nd - 1.0)) + (cells - 1.0) / (nd * (nd - 1.0)) * q_n1;
  // m^2 (1 - 1/m^2)^n == (m^2 - 1) (1 - 1/m^2)^(n-1)
  const double psr = 0.5 * ((cells - 1.0) / (nd - 1.0) * (1.0 - q_n1) - q_n1);
  return {psd, psr, psr};
}

EcGeometry ec_geometry(int m, int nu, double delta) {
  if (m < 1) throw ParameterError("m must be at least 1");
  if (nu < 1) throw ParameterError("nu must be at least 1");
  if (!(delta >= 0.0) || !std::isfinite(delta))
    throw ParameterError("delta must be a finite non-negative number");
  const long side = 2L * nu - 1;
  if (side * side > static_cast<long>(m) * m)
    throw ParameterError("EC coverage (2nu-1)^2 exceeds the m*m network");

  const double spacing = (1.0 + delta) * std::sqrt(2.0) * nu + nu;
  const double eps = std::min(std::ceil(spacing), static_cast<double>(m));
  return {static_cast<int>(eps), static_cast<int>(side * side)};
}

EcProbs ec_mac_probs(int n, int m, int nu, double delta) {
  check_counts(n, m);
  const EcGeometry geo = ec_geometry(m, nu, delta);
  const double cells = static_cast<double>(m) * m;
  const double nd = n;
  const double gamma = geo.gamma;
  const double active = 1.0 / (static_cast<double>(geo.epsilon) * geo.epsilon);
  const double q_n1 = complement_pow(1.0 / cells, n - 1);
  const double outside_n1 = complement_pow(gamma / cells, n - 1);

  const double psd = active * ((gamma - cells / nd) / (nd - 1.0) +
                               (cells - 1.0 - (gamma - 1.0) * nd) / (nd * (nd - 1.0)) * q_n1);
  const double psr =
      0.5 * active * ((cells - gamma) / (nd - 1.0) * (1.0 - q_n1) - outside_n1);
  return {{psd, psr, psr}, geo};
}

SchedProbs sched_probs(const NetworkParams& params) {
  if (params.mac == Mac::LS) return ls_mac_probs(params.n, params.m);
  return ec_mac_probs(params.n, params.m, params.nu, params.delta).probs;
}

}  // namespace bufmanet
