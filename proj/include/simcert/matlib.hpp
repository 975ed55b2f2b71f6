#pragma once

#include "simcert/types.hpp"

namespace simcert {

struct EigBounds {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
};

/// Extreme eigenvalues of a symmetric matrix. The input may carry roundoff
/// asymmetry up to `tol` in max-norm; it is symmetrized as (S+S^T)/2 before
/// the solve. Larger asymmetry is an error.
EigBounds sym_eig_bounds(const Matrix& S, double tol = kDefaultTol);

/// True iff lambda_max((S+S^T)/2) <= tol.
bool is_nsd(const Matrix& S, double tol = kDefaultTol);

/// True iff lambda_min((S+S^T)/2) >= -tol.
bool is_psd(const Matrix& S, double tol = kDefaultTol);

struct LeastSquaresResult {
  Matrix X;
  double residual = 0.0;   // ||A X - B||_F
  bool rank_deficient = false;
  Index rank = 0;
};

/// Minimum-norm least-squares solution of A X = B (Frobenius norm).
/// Rank deficiency is signaled, not thrown; the minimum-norm solution is
/// still returned.
LeastSquaresResult least_squares(const Matrix& A, const Matrix& B);

}  // namespace simcert
