#include "simcert/matlib.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

namespace simcert {

namespace {

Matrix symmetrized(const Matrix& S, double tol, const char* who) {
  if (S.rows() != S.cols()) {
    throw DimensionError(std::string(who) + ": matrix is not square (" +
                         std::to_string(S.rows()) + "x" + std::to_string(S.cols()) + ")");
  }
  const double asym = max_abs(S - S.transpose());
  if (asym > equality_threshold(tol, max_abs(S))) {
    throw AsymmetryError(std::string(who) + ": asymmetry " + std::to_string(asym) +
                         " exceeds tolerance");
  }
  return 0.5 * (S + S.transpose());
}

}  // namespace

EigBounds sym_eig_bounds(const Matrix& S, double tol) {
  const Matrix sym = symmetrized(S, tol, "sym_eig_bounds");
  if (sym.rows() == 0) return {0.0, 0.0};
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("sym_eig_bounds: eigenvalue iteration failed");
  }
  const auto& ev = solver.eigenvalues();
  return {ev(0), ev(ev.size() - 1)};
}

bool is_nsd(const Matrix& S, double tol) {
  return sym_eig_bounds(S, tol).lambda_max <= tol;
}

bool is_psd(const Matrix& S, double tol) {
  return sym_eig_bounds(S, tol).lambda_min >= -tol;
}

LeastSquaresResult least_squares(const Matrix& A, const Matrix& B) {
  if (A.rows() != B.rows()) {
    throw DimensionError("least_squares: A has " + std::to_string(A.rows()) +
                         " rows but B has " + std::to_string(B.rows()));
  }
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(A);
  LeastSquaresResult out;
  out.X = cod.solve(B);
  out.rank = cod.rank();
  out.rank_deficient = out.rank < std::min(A.rows(), A.cols());
  out.residual = (A * out.X - B).norm();
  return out;
}

}  // namespace simcert
