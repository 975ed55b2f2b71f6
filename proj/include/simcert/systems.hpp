#pragma once

#include "simcert/types.hpp"

#include <utility>
#include <vector>

namespace simcert {

enum class NonlinKind { Zero, Sine, Table };

/// Scalar slope-restricted nonlinearity. `slope_bound` is the upper slope
/// constant entering the certificate inequality (the 2/b entry); `shift` is the
/// coordinate-shift offset, kept with the model so a table nonlinearity can be
/// validated against [shift, shift + slope_bound] segment slopes.
class Nonlinearity {
 public:
  static Nonlinearity zero();
  static Nonlinearity sine();  // slope_bound 1 (Lipschitz constant of sin)
  static Nonlinearity table(std::vector<std::pair<double, double>> points,
                            double slope_bound, double shift = 0.0);

  double operator()(double r) const;

  NonlinKind kind() const { return kind_; }
  double slope_bound() const { return slope_bound_; }
  double shift() const { return shift_; }
  const std::vector<std::pair<double, double>>& points() const { return points_; }

 private:
  Nonlinearity(NonlinKind kind, double slope_bound, double shift)
      : kind_(kind), slope_bound_(slope_bound), shift_(shift) {}

  NonlinKind kind_ = NonlinKind::Zero;
  double slope_bound_ = 0.0;
  double shift_ = 0.0;
  std::vector<std::pair<double, double>> points_;  // Table only, sorted by x
};

/// One subsystem of the nonlinear class
///   x+ = A x + E phi(F x) + B nu + D w + R zeta,  y1 = C1 x,  y2 = C2 x,
/// with scalar phi (F has one row) and standard-normal zeta of dimension
/// R.cols(). R with zero columns models a noiseless system.
struct SystemModel {
  Matrix A, B, C1, C2, D, E, F, R;
  Nonlinearity phi = Nonlinearity::zero();

  Index state_dim() const { return A.rows(); }
  Index ext_input_dim() const { return B.cols(); }
  Index int_input_dim() const { return D.cols(); }
  Index ext_output_dim() const { return C1.rows(); }
  Index int_output_dim() const { return C2.rows(); }
  Index noise_dim() const { return R.cols(); }

  void validate() const;  // throws DimensionError / InvalidParameterError
};

Vector step(const SystemModel& model, const Vector& x, const Vector& nu,
            const Vector& w, const Vector& zeta);

std::pair<Vector, Vector> outputs(const SystemModel& model, const Vector& x);

/// Subsystems wired through w = M [h21(x1); ...; h2N(xN)].
struct Network {
  std::vector<SystemModel> subsystems;
  Matrix M;

  Index state_dim() const;
  Index ext_input_dim() const;
  Index ext_output_dim() const;
  Index noise_dim() const;

  void validate() const;

  /// Offset of subsystem i in the stacked state / input / output vectors.
  std::vector<Index> state_offsets() const;
  std::vector<Index> ext_input_offsets() const;
  std::vector<Index> ext_output_offsets() const;
  std::vector<Index> noise_offsets() const;

  /// Stacked internal outputs [h21(x1); ...; h2N(xN)].
  Vector stacked_internal_outputs(const Vector& x) const;
};

Vector network_step(const Network& net, const Vector& x, const Vector& nu,
                    const Vector& zeta);

/// Stacked external output [C11 x1; ...; C1N xN].
Vector network_output(const Network& net, const Vector& x);

/// Laplacian of the complete graph K_n: n I - J.
Matrix complete_graph_laplacian(Index n);

}  // namespace simcert
