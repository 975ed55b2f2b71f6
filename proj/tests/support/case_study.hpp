#pragma once

// Programmatic construction of the bundled three-block case study at an
// arbitrary per-block dimension, for use across the test suites.

#include "simcert/composition.hpp"
#include "simcert/systems.hpp"

namespace simcert::testing {

inline SystemModel case_concrete(Index ni) {
  SystemModel m;
  m.A = Matrix::Identity(ni, ni);
  m.B = Matrix::Identity(ni, ni);
  m.C1 = Matrix::Zero(1, ni);
  m.C1(0, 0) = 1.0;
  m.C2 = Matrix::Identity(ni, ni);
  m.D = Matrix::Identity(ni, ni);
  m.E = Matrix::Ones(ni, 1);
  m.F = Matrix::Zero(1, ni);
  m.F(0, 0) = 1.0;
  m.R = 0.007 * Matrix::Ones(ni, 1);
  m.phi = Nonlinearity::sine();
  return m;
}

inline SystemModel case_abstract() {
  SystemModel m;
  m.A = Matrix::Constant(1, 1, 0.5);
  m.B = Matrix::Constant(1, 1, 1.0);
  m.C1 = Matrix::Constant(1, 1, 1.0);
  m.C2 = Matrix::Constant(1, 1, 1.0);
  m.D = Matrix::Constant(1, 1, 1.0);
  m.E = Matrix::Constant(1, 1, 0.1);
  m.F = Matrix::Constant(1, 1, 1.0);
  m.R = Matrix::Zero(1, 0);
  m.phi = Nonlinearity::sine();
  return m;
}

inline StorageCertificate case_certificate(Index ni) {
  StorageCertificate c;
  c.Mtil = Matrix::Identity(ni, ni);
  c.K = -0.5 * Matrix::Identity(ni, ni);
  c.Q = -0.5 * Matrix::Ones(ni, 1);
  c.L1 = -Matrix::Ones(ni, 1);
  c.L2 = -0.1 * Matrix::Ones(ni, 1);
  c.Z = Matrix::Identity(ni, ni);
  c.G = Matrix::Identity(ni, ni);
  c.Ghat = Matrix::Ones(ni, 1);
  c.H = Matrix::Ones(ni, 1);
  c.P = Matrix::Ones(ni, 1);
  c.Rtil = Matrix::Ones(ni, 1);
  c.Xbar11 = Matrix::Identity(ni, ni);
  c.Xbar12 = 0.5 * Matrix::Identity(ni, ni);
  c.Xbar21 = 0.5 * Matrix::Identity(ni, ni);
  c.Xbar22 = Matrix::Zero(ni, ni);
  c.kappa_hat = 0.95;
  c.k_til = 1.0;
  return c;
}

/// Coupling of the full interconnection: M = -tau L for the complete graph
/// on 3*ni nodes with tau = 0.9/(n-1).
inline Matrix case_coupling(Index ni) {
  const Index n = 3 * ni;
  const double tau = 0.9 / static_cast<double>(n - 1);
  return -tau * complete_graph_laplacian(n);
}

inline Network case_concrete_network(Index ni) {
  Network net;
  net.subsystems = {case_concrete(ni), case_concrete(ni), case_concrete(ni)};
  net.M = case_coupling(ni);
  return net;
}

inline Network case_abstract_network() {
  Network net;
  net.subsystems = {case_abstract(), case_abstract(), case_abstract()};
  net.M = Matrix::Zero(3, 3);  // replaced by the solved Mhat in simulation
  return net;
}

}  // namespace simcert::testing
