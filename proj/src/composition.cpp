#include "simcert/composition.hpp"

#include "simcert/matlib.hpp"

#include <numeric>

namespace simcert {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw DimensionError(msg);
}

void check_sizes(const std::vector<StorageCertificate>& certs,
                 const std::vector<double>& mu) {
  require(!certs.empty(), "composition: empty certificate list");
  require(certs.size() == mu.size(), "composition: certs and mu length differ");
  for (double m : mu) {
    if (!(m > 0.0)) throw InvalidParameterError("composition: mu entries must be positive");
  }
}

Matrix blkdiag(const std::vector<StorageCertificate>& certs,
               Matrix StorageCertificate::*field) {
  Index rows = 0, cols = 0;
  for (const auto& c : certs) {
    rows += (c.*field).rows();
    cols += (c.*field).cols();
  }
  Matrix out = Matrix::Zero(rows, cols);
  Index r = 0, co = 0;
  for (const auto& c : certs) {
    const Matrix& b = c.*field;
    out.block(r, co, b.rows(), b.cols()) = b;
    r += b.rows();
    co += b.cols();
  }
  return out;
}

}  // namespace

Matrix build_xcmp(const std::vector<StorageCertificate>& certs,
                  const std::vector<double>& mu) {
  check_sizes(certs, mu);
  Index gtot = 0, qtot = 0;
  for (const auto& c : certs) {
    gtot += c.Xbar11.rows();
    qtot += c.Xbar22.rows();
  }
  Matrix x = Matrix::Zero(gtot + qtot, gtot + qtot);
  Index go = 0, qo = 0;
  for (std::size_t i = 0; i < certs.size(); ++i) {
    const auto& c = certs[i];
    const Index g = c.Xbar11.rows();
    const Index q = c.Xbar22.rows();
    x.block(go, go, g, g) = mu[i] * c.Xbar11;
    x.block(go, gtot + qo, g, q) = mu[i] * c.Xbar12;
    x.block(gtot + qo, go, q, g) = mu[i] * c.Xbar21;
    x.block(gtot + qo, gtot + qo, q, q) = mu[i] * c.Xbar22;
    go += g;
    qo += q;
  }
  return x;
}

LmiResult check_lmi(const Matrix& M, const std::vector<StorageCertificate>& certs,
                    const std::vector<double>& mu, double tol) {
  check_sizes(certs, mu);
  const Matrix g = blkdiag(certs, &StorageCertificate::G);
  require(M.rows() == g.cols(), "check_lmi: M row count != total internal input dim");
  const Index qt = M.cols();
  const Matrix xcmp = build_xcmp(certs, mu);
  Matrix stacked(g.rows() + qt, qt);
  stacked.topRows(g.rows()) = g * M;
  stacked.bottomRows(qt) = Matrix::Identity(qt, qt);
  const Matrix form = stacked.transpose() * xcmp * stacked;
  // Assembly roundoff can leave the form slightly asymmetric.
  const Matrix sym = 0.5 * (form + form.transpose());
  LmiResult out;
  out.lambda_max = sym_eig_bounds(sym, tol).lambda_max;
  out.ok = out.lambda_max <= tol;
  return out;
}

CouplingSolve solve_abstract_coupling(const Matrix& M,
                                      const std::vector<StorageCertificate>& certs,
                                      double tol) {
  require(!certs.empty(), "solve_abstract_coupling: empty certificate list");
  const Matrix g = blkdiag(certs, &StorageCertificate::G);
  const Matrix ghat = blkdiag(certs, &StorageCertificate::Ghat);
  const Matrix h = blkdiag(certs, &StorageCertificate::H);
  require(M.rows() == g.cols(), "solve_abstract_coupling: M row count != total internal input dim");
  require(M.cols() == h.rows(), "solve_abstract_coupling: M column count != total internal output dim");
  const Matrix rhs = g * M * h;
  const LeastSquaresResult ls = least_squares(ghat, rhs);
  CouplingSolve out;
  out.Mhat = ls.X;
  out.residual = ls.residual;
  out.threshold = equality_threshold(tol, max_abs(rhs));
  out.ok = out.residual <= out.threshold;
  return out;
}

ComposedSsf compose(const std::vector<StorageCertificate>& certs,
                    const std::vector<SsfParams>& params,
                    const std::vector<double>& mu, ComposeMode mode,
                    const std::vector<SystemModel>* concretes) {
  check_sizes(certs, mu);
  require(certs.size() == params.size(), "compose: certs and params length differ");

  ComposedSsf out;
  out.mu = mu;
  out.mode = mode;

  double psi = 0.0;
  double kappa = params[0].kappa_lin;
  double rho = 0.0;
  double inv_alpha_sum = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    psi += mu[i] * params[i].psi;
    kappa = std::min(kappa, params[i].kappa_lin);
    rho = std::max(rho, mu[i] * params[i].rho_coeff);
    inv_alpha_sum += 1.0 / (params[i].alpha_coeff * mu[i]);
  }
  out.params.psi = psi;
  out.params.kappa_lin = kappa;
  out.params.rho_coeff = rho;

  if (mode == ComposeMode::Generic) {
    out.params.alpha_coeff = 1.0 / inv_alpha_sum;
    return out;
  }

  if (concretes == nullptr || concretes->size() != certs.size()) {
    throw InvalidParameterError(
        "compose: quadratic-specialized mode needs the concrete models");
  }
  // Stacked quadratic form: Mtil = blkdiag(mu_i Mtil_i), C1 = blkdiag(C1_i).
  Index n = 0, q = 0;
  for (std::size_t i = 0; i < certs.size(); ++i) {
    n += certs[i].Mtil.rows();
    q += (*concretes)[i].C1.rows();
  }
  Matrix mtil = Matrix::Zero(n, n);
  Matrix c1 = Matrix::Zero(q, n);
  Index no = 0, qo = 0;
  for (std::size_t i = 0; i < certs.size(); ++i) {
    const Index ni = certs[i].Mtil.rows();
    const Index qi = (*concretes)[i].C1.rows();
    mtil.block(no, no, ni, ni) = mu[i] * certs[i].Mtil;
    c1.block(qo, no, qi, ni) = (*concretes)[i].C1;
    no += ni;
    qo += qi;
  }
  const double lam_min = sym_eig_bounds(mtil).lambda_min;
  const double lam_max = sym_eig_bounds(Matrix(c1.transpose() * c1)).lambda_max;
  out.params.alpha_coeff = lam_min / lam_max;
  return out;
}

ComposedSsf compose_checked(const Matrix& M,
                            const std::vector<StorageCertificate>& certs,
                            const std::vector<SsfParams>& params,
                            const std::vector<double>& mu, ComposeMode mode,
                            const std::vector<SystemModel>* concretes, double tol) {
  const LmiResult lmi = check_lmi(M, certs, mu, tol);
  if (!lmi.ok) {
    throw NotVerifiedError("compose: dissipativity LMI failed (lambda_max = " +
                           std::to_string(lmi.lambda_max) + ")");
  }
  const CouplingSolve coupling = solve_abstract_coupling(M, certs, tol);
  if (!coupling.ok) {
    throw NotVerifiedError("compose: abstract coupling residual " +
                           std::to_string(coupling.residual) + " exceeds tolerance");
  }
  return compose(certs, params, mu, mode, concretes);
}

double composed_storage_value(const std::vector<StorageCertificate>& certs,
                              const std::vector<double>& mu, const Vector& x,
                              const Vector& xhat) {
  check_sizes(certs, mu);
  double v = 0.0;
  Index xo = 0, ho = 0;
  for (std::size_t i = 0; i < certs.size(); ++i) {
    const Index n = certs[i].Mtil.rows();
    const Index nh = certs[i].P.cols();
    v += mu[i] * eval_storage(certs[i], x.segment(xo, n), xhat.segment(ho, nh));
    xo += n;
    ho += nh;
  }
  require(xo == x.size() && ho == xhat.size(), "composed_storage_value: stacked dims mismatch");
  return v;
}

}  // namespace simcert
