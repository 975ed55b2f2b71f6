#pragma once

#include "simcert/certificates.hpp"

namespace simcert {

struct BoundQuery {
  double V0 = 0.0;         // V(a, ahat)
  double epsilon = 0.0;    // output closeness level
  long Td = 0;             // time horizon
  double nuhat_sup = 0.0;  // sup-norm bound on the abstract input
  SsfParams params;
};

enum class BoundBranch { HighThreshold, LowThreshold, Infinite };

struct ProbabilityBound {
  double delta = 0.0;      // clamped to [0, 1]
  double delta_raw = 0.0;  // before clamping
  BoundBranch branch = BoundBranch::HighThreshold;
  double psi_hat = 0.0;
};

/// Finite-horizon closeness level: probability bound delta on the event
/// sup_{0<=k<=Td} ||y - yhat|| >= epsilon, evaluated with
/// psi_hat = rho_coeff * nuhat_sup^2 + psi (the tightest admissible choice)
/// and alpha(eps) = alpha_coeff * eps^2. Two-branch formula switching at
/// alpha(eps) = psi_hat / kappa_lin.
ProbabilityBound finite_horizon_delta(const BoundQuery& q);

/// Supermartingale bound min(1, V0 / (alpha_coeff eps^2)) over the infinite
/// horizon; only valid when rho_ext == 0 and psi == 0.
double infinite_horizon_delta(double V0, double epsilon, const SsfParams& params);

}  // namespace simcert
