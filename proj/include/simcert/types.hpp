#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace simcert {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Default absolute tolerance for definiteness tests and entry-wise
/// equality checks. Equalities are compared against tol*max(1, max|entry|).
inline constexpr double kDefaultTol = 1e-9;

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct AsymmetryError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NotVerifiedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SingularGramError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

inline double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

/// Threshold for entry-wise equality residuals: tol, scaled up when the
/// compared quantities themselves are large.
inline double equality_threshold(double tol, double scale) {
  return tol * std::max(1.0, scale);
}

}  // namespace simcert
