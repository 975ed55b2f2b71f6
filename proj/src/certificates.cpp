#include "simcert/certificates.hpp"

#include "simcert/matlib.hpp"

#include <cmath>
#include <limits>

namespace simcert {

const ConditionResult* CheckReport::find(const std::string& name) const {
  for (const auto& c : conditions) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw DimensionError(msg);
}

ConditionResult equality_condition(const std::string& name, const Matrix& lhs,
                                   const Matrix& rhs, double tol) {
  ConditionResult c;
  c.name = name;
  c.residual = max_abs(lhs - rhs);
  c.threshold = equality_threshold(tol, std::max(max_abs(lhs), max_abs(rhs)));
  c.passed = c.residual <= c.threshold;
  return c;
}

void check_cert_dims(const SystemModel& conc, const SystemModel& abst,
                     const StorageCertificate& cert) {
  conc.validate();
  abst.validate();
  require(conc.ext_output_dim() == abst.ext_output_dim(),
          "certificate: concrete and abstract external output dimensions differ");
  const Index n = conc.state_dim();
  const Index nh = abst.state_dim();
  const Index m = conc.ext_input_dim();
  const Index mh = abst.ext_input_dim();
  const Index q2 = conc.int_output_dim();
  require(cert.Mtil.rows() == n && cert.Mtil.cols() == n, "certificate: Mtil must be n x n");
  require(cert.P.rows() == n && cert.P.cols() == nh, "certificate: P must be n x nhat");
  require(cert.K.rows() == m && cert.K.cols() == n, "certificate: K must be m x n");
  require(cert.Q.rows() == m && cert.Q.cols() == nh, "certificate: Q must be m x nhat");
  require(cert.Rtil.rows() == m && cert.Rtil.cols() == mh, "certificate: Rtil must be m x mhat");
  require(cert.L1.rows() == m && cert.L1.cols() == 1, "certificate: L1 must be m x 1");
  require(cert.L2.rows() == m && cert.L2.cols() == 1, "certificate: L2 must be m x 1");
  require(cert.Z.rows() == n, "certificate: Z row count != state dim");
  require(cert.G.cols() == conc.int_input_dim(), "certificate: G column count != internal input dim");
  require(cert.Z.cols() == cert.G.rows(), "certificate: Z columns != G rows");
  const Index g = cert.G.rows();
  require(cert.Xbar11.rows() == g && cert.Xbar11.cols() == g, "certificate: Xbar11 must be g x g");
  require(cert.Xbar12.rows() == g && cert.Xbar12.cols() == q2, "certificate: Xbar12 must be g x q2");
  require(cert.Xbar21.rows() == q2 && cert.Xbar21.cols() == g, "certificate: Xbar21 must be q2 x g");
  require(cert.Xbar22.rows() == q2 && cert.Xbar22.cols() == q2, "certificate: Xbar22 must be q2 x q2");
  require(cert.H.rows() == q2 && cert.H.cols() == abst.int_output_dim(),
          "certificate: H must be q2 x q2hat");
  require(cert.Ghat.rows() == cert.Z.cols(), "certificate: Ghat row count != Z column count");
  require(cert.Ghat.cols() == abst.int_input_dim(),
          "certificate: Ghat column count != abstract internal input dim");
}

struct CertGeometry {
  Matrix T1;  // A + B K
  Matrix T2;  // Z
  Matrix T3;  // B L1 + E
  Matrix T4;  // B Rtil - P Bhat
};

CertGeometry cert_geometry(const SystemModel& conc, const SystemModel& abst,
                           const StorageCertificate& cert) {
  CertGeometry geo;
  geo.T1 = conc.A + conc.B * cert.K;
  geo.T2 = cert.Z;
  geo.T3 = conc.B * cert.L1 + conc.E;
  geo.T4 = conc.B * cert.Rtil - cert.P * abst.B;
  return geo;
}

}  // namespace

CheckReport verify_storage(const SystemModel& conc, const SystemModel& abst,
                           const StorageCertificate& cert, double tol) {
  check_cert_dims(conc, abst, cert);
  // kappa_hat = 0 is admitted here so that a broken contraction shows up as a
  // failing inequality rather than a thrown error; values >= 1 are structural.
  if (!(cert.kappa_hat >= 0.0 && cert.kappa_hat < 1.0)) {
    throw InvalidParameterError("certificate: kappa_hat must lie in [0,1)");
  }
  if (!(cert.k_til > 0.0)) {
    throw InvalidParameterError("certificate: k_til must be positive");
  }
  // Structural demands: Mtil > 0 and Xbar symmetric across its blocks.
  const EigBounds mtil_ev = sym_eig_bounds(cert.Mtil, tol);
  if (mtil_ev.lambda_min <= tol) {
    throw InvalidParameterError("certificate: Mtil is not positive definite");
  }
  {
    const double asym = max_abs(cert.Xbar21 - cert.Xbar12.transpose());
    if (asym > equality_threshold(tol, std::max(max_abs(cert.Xbar12), max_abs(cert.Xbar21)))) {
      throw AsymmetryError("certificate: Xbar21 != Xbar12^T beyond tolerance");
    }
    sym_eig_bounds(cert.Xbar11, tol);  // throws if asymmetric
    sym_eig_bounds(cert.Xbar22, tol);
  }

  const CertGeometry geo = cert_geometry(conc, abst, cert);
  CheckReport report;
  auto& cs = report.conditions;

  cs.push_back(equality_condition("D=ZG", conc.D, cert.Z * cert.G, tol));

  // Block inequality: left side S^T Mtil S with S = [T1 T2 T3 T4], right side
  // the printed 4x4 block matrix; checked as lambda_min(RHS - LHS) >= -tol.
  {
    const Index n = conc.state_dim();
    const Index g = cert.G.rows();
    const Index mh = abst.ext_input_dim();
    const Index dim = n + g + 1 + mh;
    Matrix S(n, dim);
    S << geo.T1, geo.T2, geo.T3, geo.T4;
    const Matrix lhs = S.transpose() * cert.Mtil * S;

    Matrix rhs = Matrix::Zero(dim, dim);
    const Index i1 = n, i2 = n + g, i3 = n + g + 1;
    rhs.block(0, 0, n, n) =
        cert.kappa_hat * cert.Mtil + conc.C2.transpose() * cert.Xbar22 * conc.C2;
    rhs.block(0, i1, n, g) = conc.C2.transpose() * cert.Xbar21;
    rhs.block(i1, 0, g, n) = cert.Xbar12 * conc.C2;
    rhs.block(0, i2, n, 1) = -conc.F.transpose();
    rhs.block(i2, 0, 1, n) = -conc.F;
    rhs.block(i1, i1, g, g) = cert.Xbar11;
    const double b = conc.phi.slope_bound();
    rhs(i2, i2) = std::isinf(b) ? 0.0 : 2.0 / b;  // b = +inf degenerates to 0
    rhs.block(i3, i3, mh, mh) = cert.k_til * geo.T4.transpose() * cert.Mtil * geo.T4;

    ConditionResult c;
    c.name = "storage_lmi";
    const double lam_min = sym_eig_bounds(rhs - lhs, tol * 10.0).lambda_min;
    c.residual = std::max(0.0, -lam_min);
    c.threshold = tol;
    c.passed = c.residual <= c.threshold;
    cs.push_back(c);
  }

  cs.push_back(equality_condition("AP=PAhat-BQ", conc.A * cert.P,
                                  cert.P * abst.A - conc.B * cert.Q, tol));
  cs.push_back(equality_condition("C1P=C1hat", conc.C1 * cert.P, abst.C1, tol));
  cs.push_back(equality_condition("X12C2P=X12HC2hat", cert.Xbar12 * conc.C2 * cert.P,
                                  cert.Xbar12 * cert.H * abst.C2, tol));
  cs.push_back(equality_condition("X22C2P=X22HC2hat", cert.Xbar22 * conc.C2 * cert.P,
                                  cert.Xbar22 * cert.H * abst.C2, tol));
  cs.push_back(equality_condition("FP=Fhat", conc.F * cert.P, abst.F, tol));
  cs.push_back(equality_condition("E=PEhat-B(L1-L2)", conc.E,
                                  cert.P * abst.E - conc.B * (cert.L1 - cert.L2), tol));
  cs.push_back(equality_condition("PDhat=ZGhat", cert.P * abst.D, cert.Z * cert.Ghat, tol));

  report.passed = true;
  for (const auto& c : cs) report.passed = report.passed && c.passed;
  return report;
}

SsfParams derive_params(const SystemModel& conc, const SystemModel& abst,
                        const StorageCertificate& cert, double tol) {
  const CheckReport report = verify_storage(conc, abst, cert, tol);
  if (!report.passed) {
    std::string failing;
    for (const auto& c : report.conditions) {
      if (!c.passed) failing += (failing.empty() ? "" : ", ") + c.name;
    }
    throw NotVerifiedError("derive_params: certificate failed conditions: " + failing);
  }
  SsfParams p;
  const double lam_min_mtil = sym_eig_bounds(cert.Mtil, tol).lambda_min;
  const Matrix c1tc1 = conc.C1.transpose() * conc.C1;
  const double lam_max_c1 = sym_eig_bounds(c1tc1, tol).lambda_max;
  p.alpha_coeff = lam_min_mtil / lam_max_c1;
  p.kappa_lin = 1.0 - cert.kappa_hat;
  const Matrix t4 = conc.B * cert.Rtil - cert.P * abst.B;
  // ||sqrt(Mtil) T4||^2 as lambda_max(T4^T Mtil T4); avoids a matrix square root.
  const Matrix gram = t4.transpose() * cert.Mtil * t4;
  p.rho_coeff = gram.size() == 0 ? 0.0 : cert.k_til * sym_eig_bounds(gram, tol).lambda_max;
  double psi = (conc.R.transpose() * cert.Mtil * conc.R).trace();
  if (abst.noise_dim() > 0) {
    const Matrix pr = cert.P * abst.R;
    psi += (pr.transpose() * cert.Mtil * pr).trace();
  }
  p.psi = psi;
  return p;
}

Vector interface_input(const StorageCertificate& cert, const SystemModel& conc,
                       const SystemModel& abst, const Vector& x,
                       const Vector& xhat, const Vector& nuhat) {
  require(x.size() == conc.state_dim(), "interface: concrete state dimension mismatch");
  require(xhat.size() == abst.state_dim(), "interface: abstract state dimension mismatch");
  require(nuhat.size() == abst.ext_input_dim(), "interface: abstract input dimension mismatch");
  Vector nu = cert.K * (x - cert.P * xhat) + cert.Q * xhat + cert.Rtil * nuhat;
  nu += cert.L1 * conc.phi((conc.F * x)(0));
  nu -= cert.L2 * conc.phi((conc.F * cert.P * xhat)(0));
  return nu;
}

Matrix optimal_rtil(const StorageCertificate& cert, const SystemModel& conc,
                    const SystemModel& abst) {
  const Matrix gram = conc.B.transpose() * cert.Mtil * conc.B;
  Eigen::FullPivLU<Matrix> lu(gram);
  if (!lu.isInvertible()) {
    throw SingularGramError("optimal_rtil: B^T Mtil B is singular");
  }
  return lu.solve(conc.B.transpose() * cert.Mtil * cert.P * abst.B);
}

double eval_storage(const StorageCertificate& cert, const Vector& x, const Vector& xhat) {
  require(x.size() == cert.Mtil.rows(), "eval_storage: state dimension mismatch");
  require(xhat.size() == cert.P.cols(), "eval_storage: abstract state dimension mismatch");
  const Vector e = x - cert.P * xhat;
  return e.dot(cert.Mtil * e);
}

double expected_storage_after_step(const StorageCertificate& cert,
                                   const SystemModel& conc, const SystemModel& abst,
                                   const Vector& x, const Vector& xhat,
                                   const Vector& nuhat, const Vector& w,
                                   const Vector& what) {
  const Vector nu = interface_input(cert, conc, abst, x, xhat, nuhat);
  const Vector zc = Vector::Zero(conc.noise_dim());
  const Vector za = Vector::Zero(abst.noise_dim());
  const Vector mean_next = step(conc, x, nu, w, zc);
  const Vector mean_next_hat = step(abst, xhat, nuhat, what, za);
  const Vector drift = mean_next - cert.P * mean_next_hat;
  double value = drift.dot(cert.Mtil * drift);
  value += (conc.R.transpose() * cert.Mtil * conc.R).trace();
  if (abst.noise_dim() > 0) {
    const Matrix pr = cert.P * abst.R;
    value += (pr.transpose() * cert.Mtil * pr).trace();
  }
  return value;
}

}  // namespace simcert
