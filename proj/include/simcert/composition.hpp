#pragma once

#include "simcert/certificates.hpp"

#include <vector>

namespace simcert {

/// Network-level dissipativity matrix: the 2x2 arrangement of block
/// diagonals carrying mu_i Xbar_i^{jk}, zeros elsewhere.
Matrix build_xcmp(const std::vector<StorageCertificate>& certs,
                  const std::vector<double>& mu);

struct LmiResult {
  bool ok = false;
  double lambda_max = 0.0;
};

/// Evaluates [GM; I]^T Xcmp [GM; I] with G = blkdiag(G_i) and tests it for
/// negative semidefiniteness.
LmiResult check_lmi(const Matrix& M, const std::vector<StorageCertificate>& certs,
                    const std::vector<double>& mu, double tol = kDefaultTol);

struct CouplingSolve {
  Matrix Mhat;
  double residual = 0.0;
  bool ok = false;  // residual <= threshold (exact solvability, equitable case)
  double threshold = 0.0;
};

/// Least-squares solve of Ghat Mhat = G M H with Ghat = blkdiag(Ghat_i),
/// H = blkdiag(H_i). A residual beyond tolerance flags a coupling that is
/// not exactly reducible (non-equitable partition in the Laplacian case).
CouplingSolve solve_abstract_coupling(const Matrix& M,
                                      const std::vector<StorageCertificate>& certs,
                                      double tol = kDefaultTol);

enum class ComposeMode { Generic, QuadraticSpecialized };

struct ComposedSsf {
  SsfParams params;
  std::vector<double> mu;
  ComposeMode mode = ComposeMode::Generic;
};

/// Composes per-subsystem storage-function parameters into network-level
/// simulation-function parameters for V = sum mu_i V_i.
///
/// Generic mode uses the closed forms of the defining extremal problems for
/// the parametric family (power-2 alpha/rho, linear kappa):
///   kappa_lin  = min_i kappa_lin_i
///   rho_coeff  = max_i mu_i rho_coeff_i
///   alpha_coeff = 1 / sum_i 1/(alpha_coeff_i mu_i)
/// Quadratic-specialized mode instead evaluates the stacked quadratic form
/// directly: alpha_coeff = lambda_min(blkdiag(mu_i Mtil_i)) / lambda_max of
/// the stacked C1^T C1; it needs the concrete models and is tighter.
/// psi = sum mu_i psi_i in both modes.
ComposedSsf compose(const std::vector<StorageCertificate>& certs,
                    const std::vector<SsfParams>& params,
                    const std::vector<double>& mu, ComposeMode mode,
                    const std::vector<SystemModel>* concretes = nullptr);

/// compose() preceded by check_lmi and solve_abstract_coupling; throws
/// NotVerifiedError when either fails.
ComposedSsf compose_checked(const Matrix& M,
                            const std::vector<StorageCertificate>& certs,
                            const std::vector<SsfParams>& params,
                            const std::vector<double>& mu, ComposeMode mode,
                            const std::vector<SystemModel>* concretes = nullptr,
                            double tol = kDefaultTol);

/// Sum of mu_i V_i over the stacked pair; block offsets from the certs.
double composed_storage_value(const std::vector<StorageCertificate>& certs,
                              const std::vector<double>& mu, const Vector& x,
                              const Vector& xhat);

}  // namespace simcert
