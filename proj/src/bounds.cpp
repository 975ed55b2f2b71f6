#include "simcert/bounds.hpp"

#include <cmath>

namespace simcert {

ProbabilityBound finite_horizon_delta(const BoundQuery& q) {
  const double kap = q.params.kappa_lin;
  if (!(kap > 0.0 && kap < 1.0)) {
    throw InvalidParameterError("finite_horizon_delta: kappa_lin must lie in (0,1)");
  }
  if (q.V0 < 0.0 || q.nuhat_sup < 0.0 || q.Td < 0) {
    throw InvalidParameterError("finite_horizon_delta: negative V0, nuhat_sup or Td");
  }
  const double alpha_eps = q.params.alpha_coeff * q.epsilon * q.epsilon;
  if (!(alpha_eps > 0.0)) {
    throw InvalidParameterError("finite_horizon_delta: alpha(eps) must be positive");
  }
  ProbabilityBound out;
  out.psi_hat = q.params.rho_coeff * q.nuhat_sup * q.nuhat_sup + q.params.psi;

  const double td = static_cast<double>(q.Td);
  if (alpha_eps >= out.psi_hat / kap) {
    out.branch = BoundBranch::HighThreshold;
    out.delta_raw =
        1.0 - (1.0 - q.V0 / alpha_eps) * std::pow(1.0 - out.psi_hat / alpha_eps, td);
  } else {
    out.branch = BoundBranch::LowThreshold;
    const double decay = std::pow(1.0 - kap, td);
    out.delta_raw = (q.V0 / alpha_eps) * decay +
                    (out.psi_hat / (kap * alpha_eps)) * (1.0 - decay);
  }
  out.delta = std::min(1.0, std::max(0.0, out.delta_raw));
  return out;
}

double infinite_horizon_delta(double V0, double epsilon, const SsfParams& params) {
  if (params.psi != 0.0 || params.rho_coeff != 0.0) {
    throw InvalidParameterError(
        "infinite_horizon_delta: requires rho_ext == 0 and psi == 0");
  }
  if (V0 < 0.0) throw InvalidParameterError("infinite_horizon_delta: negative V0");
  const double alpha_eps = params.alpha_coeff * epsilon * epsilon;
  if (!(alpha_eps > 0.0)) {
    throw InvalidParameterError("infinite_horizon_delta: alpha(eps) must be positive");
  }
  return std::min(1.0, V0 / alpha_eps);
}

}  // namespace simcert
