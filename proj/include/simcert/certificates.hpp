#pragma once

#include "simcert/systems.hpp"
#include "simcert/types.hpp"

#include <string>
#include <vector>

namespace simcert {

/// Candidate data certifying V(x, xhat) = (x - P xhat)^T Mtil (x - P xhat)
/// as a stochastic storage function from an abstraction to a concrete
/// subsystem. Xbar blocks are conformal: Xbar11 is g x g (g = rows of G),
/// Xbar22 is q2 x q2, and Xbar21 = Xbar12^T within tolerance.
struct StorageCertificate {
  Matrix Mtil;
  Matrix K, Q, L1, L2, Z, G, Ghat, H, P, Rtil;
  Matrix Xbar11, Xbar12, Xbar21, Xbar22;
  double kappa_hat = 0.0;  // in (0, 1)
  double k_til = 0.0;      // > 0
};

/// Parametric form of the comparison functions attached to a storage /
/// simulation function: alpha(s) = alpha_coeff s^2, kappa(s) = kappa_lin s,
/// rho_ext(s) = rho_coeff s^2, plus the additive constant psi.
struct SsfParams {
  double alpha_coeff = 0.0;
  double kappa_lin = 0.0;
  double rho_coeff = 0.0;
  double psi = 0.0;
};

struct ConditionResult {
  std::string name;
  double residual = 0.0;
  double threshold = 0.0;
  bool passed = false;
};

struct CheckReport {
  bool passed = false;
  std::vector<ConditionResult> conditions;

  const ConditionResult* find(const std::string& name) const;
};

/// Checks the full set of certificate conditions: the coupling factorization
/// D = ZG, the block matrix inequality (as a PSD residual on its
/// right-minus-left side), and the seven matching equalities tying the
/// abstraction to the concrete model. Throws on structural defects
/// (dimension mismatch, Mtil not positive definite, asymmetric Xbar);
/// condition failures are reported, not thrown.
CheckReport verify_storage(const SystemModel& conc, const SystemModel& abst,
                           const StorageCertificate& cert, double tol = kDefaultTol);

/// Comparison-function parameters of the verified certificate:
///   alpha_coeff = lambda_min(Mtil) / lambda_max(C1^T C1)
///   kappa_lin   = 1 - kappa_hat
///   rho_coeff   = k_til * ||sqrt(Mtil)(B Rtil - P Bhat)||^2
///   psi         = Tr(R^T Mtil R + Rhat^T P^T Mtil P Rhat)
/// Runs verify_storage first and throws NotVerifiedError if it fails.
SsfParams derive_params(const SystemModel& conc, const SystemModel& abst,
                        const StorageCertificate& cert, double tol = kDefaultTol);

/// Interface map refining an abstract input to a concrete one:
///   nu = K(x - P xhat) + Q xhat + Rtil nuhat + L1 phi(F x) - L2 phi(F P xhat).
Vector interface_input(const StorageCertificate& cert, const SystemModel& conc,
                       const SystemModel& abst, const Vector& x,
                       const Vector& xhat, const Vector& nuhat);

/// The rho_ext-minimizing choice Rtil = (B^T Mtil B)^-1 B^T Mtil P Bhat.
Matrix optimal_rtil(const StorageCertificate& cert, const SystemModel& conc,
                    const SystemModel& abst);

/// V(x, xhat) = (x - P xhat)^T Mtil (x - P xhat).
double eval_storage(const StorageCertificate& cert, const Vector& x, const Vector& xhat);

/// Analytic one-step conditional expectation of V(x+, xhat+) under the
/// interface, using E[zeta] = 0 and E[zeta zeta^T] = I; the deterministic
/// drift plus the trace term. Used as a consistency oracle against Monte
/// Carlo means.
double expected_storage_after_step(const StorageCertificate& cert,
                                   const SystemModel& conc, const SystemModel& abst,
                                   const Vector& x, const Vector& xhat,
                                   const Vector& nuhat, const Vector& w,
                                   const Vector& what);

}  // namespace simcert
