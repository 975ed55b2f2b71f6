#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "simcert/composition.hpp"
#include "simcert/matlib.hpp"
#include "simcert/montecarlo.hpp"
#include "support/case_study.hpp"

#include <cmath>
#include <random>

using namespace simcert;
using namespace simcert::testing;

namespace {

StorageCertificate scalar_cert(double x11, double x12, double x21, double x22,
                               double g = 1.0, double ghat = 1.0, double h = 1.0) {
  StorageCertificate c;
  c.Xbar11 = Matrix::Constant(1, 1, x11);
  c.Xbar12 = Matrix::Constant(1, 1, x12);
  c.Xbar21 = Matrix::Constant(1, 1, x21);
  c.Xbar22 = Matrix::Constant(1, 1, x22);
  c.G = Matrix::Constant(1, 1, g);
  c.Ghat = Matrix::Constant(1, 1, ghat);
  c.H = Matrix::Constant(1, 1, h);
  return c;
}

}  // namespace

TEST_CASE("build_xcmp: single subsystem returns Xbar itself") {
  const StorageCertificate c = case_certificate(4);
  const Matrix x = build_xcmp({c}, {1.0});
  Matrix expect(8, 8);
  expect.topLeftCorner(4, 4) = c.Xbar11;
  expect.topRightCorner(4, 4) = c.Xbar12;
  expect.bottomLeftCorner(4, 4) = c.Xbar21;
  expect.bottomRightCorner(4, 4) = c.Xbar22;
  CHECK((x - expect).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("build_xcmp: case-study blocks give [[I, lambda I],[lambda I, 0]]") {
  const Index ni = 5;
  const std::vector<StorageCertificate> certs(3, case_certificate(ni));
  const Matrix x = build_xcmp(certs, {1.0, 1.0, 1.0});
  const Index n = 3 * ni;
  Matrix expect = Matrix::Zero(2 * n, 2 * n);
  expect.topLeftCorner(n, n) = Matrix::Identity(n, n);
  expect.topRightCorner(n, n) = 0.5 * Matrix::Identity(n, n);
  expect.bottomLeftCorner(n, n) = 0.5 * Matrix::Identity(n, n);
  CHECK((x - expect).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("build_xcmp: two scalar blocks match the hand-permuted assembly") {
  const auto c1 = scalar_cert(1.0, 2.0, 2.0, 3.0);
  const auto c2 = scalar_cert(-4.0, 5.0, 5.0, -6.0);
  const Matrix x = build_xcmp({c1, c2}, {2.0, 3.0});
  Matrix expect(4, 4);
  expect << 2.0, 0.0, 4.0, 0.0,    // mu1 X11_1, mu1 X12_1
            0.0, -12.0, 0.0, 15.0, // mu2 X11_2, mu2 X12_2
            4.0, 0.0, 6.0, 0.0,    // mu1 X21_1, mu1 X22_1
            0.0, 15.0, 0.0, -18.0;
  CHECK((x - expect).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("check_lmi: decoupled network with nonpositive Xbar22") {
  auto c1 = scalar_cert(1.0, 0.5, 0.5, -1.0);
  auto c2 = scalar_cert(2.0, 0.0, 0.0, -0.5);
  const Matrix m = Matrix::Zero(2, 2);
  const auto res = check_lmi(m, {c1, c2}, {1.0, 1.0});
  CHECK(res.ok);
  CHECK(res.lambda_max == doctest::Approx(-0.5));
}

TEST_CASE("check_lmi: the full-size interconnection passes, larger tau fails") {
  const Index ni = 74;
  const std::vector<StorageCertificate> certs(3, case_certificate(ni));
  const std::vector<double> mu(3, 1.0);
  const auto ok = check_lmi(case_coupling(ni), certs, mu);
  CHECK(ok.ok);
  CHECK(ok.lambda_max <= 1e-9);

  const Index n = 3 * ni;
  const double bad_tau = 2.5 / static_cast<double>(n - 1);
  const Matrix bad = -bad_tau * complete_graph_laplacian(n);
  const auto fail = check_lmi(bad, certs, mu);
  CHECK_FALSE(fail.ok);
  const double tn = bad_tau * static_cast<double>(n);
  CHECK(fail.lambda_max == doctest::Approx(tn * (tn - 1.0)).epsilon(1e-9));
}

TEST_CASE("check_lmi is invariant under subsystem reordering") {
  // heterogeneous internal dimensions: 2 and 3
  StorageCertificate a;
  a.G = Matrix::Identity(2, 2);
  a.Ghat = Matrix::Ones(2, 1);
  a.H = Matrix::Ones(2, 1);
  a.Xbar11 = Matrix::Identity(2, 2);
  a.Xbar12 = 0.4 * Matrix::Identity(2, 2);
  a.Xbar21 = 0.4 * Matrix::Identity(2, 2);
  a.Xbar22 = -0.1 * Matrix::Identity(2, 2);
  StorageCertificate b;
  b.G = 2.0 * Matrix::Identity(3, 3);
  b.Ghat = Matrix::Ones(3, 1);
  b.H = Matrix::Ones(3, 1);
  b.Xbar11 = 0.5 * Matrix::Identity(3, 3);
  b.Xbar12 = 0.2 * Matrix::Identity(3, 3);
  b.Xbar21 = 0.2 * Matrix::Identity(3, 3);
  b.Xbar22 = -0.3 * Matrix::Identity(3, 3);

  std::mt19937_64 rng(2024);
  std::normal_distribution<double> dist;
  Matrix m(5, 5);
  for (Index r = 0; r < 5; ++r) {
    for (Index c = 0; c < 5; ++c) m(r, c) = 0.1 * dist(rng);
  }
  const auto fwd = check_lmi(m, {a, b}, {1.5, 0.7});

  Matrix perm(5, 5);
  perm.setZero();
  // block order (3, 2): rows/cols swapped accordingly
  perm.block(0, 2, 3, 3) = Matrix::Identity(3, 3);
  perm.block(3, 0, 2, 2) = Matrix::Identity(2, 2);
  const Matrix m_perm = perm * m * perm.transpose();
  const auto rev = check_lmi(m_perm, {b, a}, {0.7, 1.5});
  CHECK(fwd.lambda_max == doctest::Approx(rev.lambda_max).epsilon(1e-12));
  CHECK(fwd.ok == rev.ok);
}

TEST_CASE("solve_abstract_coupling: equitable complete graph is exact") {
  const Index ni = 74;
  const std::vector<StorageCertificate> certs(3, case_certificate(ni));
  const auto sol = solve_abstract_coupling(case_coupling(ni), certs);
  CHECK(sol.ok);
  CHECK(sol.residual <= 1e-9);
  REQUIRE(sol.Mhat.rows() == 3);
  REQUIRE(sol.Mhat.cols() == 3);
  const Index n = 3 * ni;
  const double tau = 0.9 / static_cast<double>(n - 1);
  CHECK(sol.Mhat(0, 0) == doctest::Approx(-tau * (n - ni)));
  CHECK(sol.Mhat(1, 0) == doctest::Approx(tau * ni));
}

TEST_CASE("solve_abstract_coupling: non-equitable path partition is flagged") {
  // path graph on 3 nodes, blocks {1}, {2,3}: column sums differ inside the block
  Matrix l(3, 3);
  l << 1, -1, 0, -1, 2, -1, 0, -1, 1;
  const Matrix m = -0.3 * l;
  StorageCertificate a;
  a.G = Matrix::Identity(1, 1);
  a.Ghat = Matrix::Ones(1, 1);
  a.H = Matrix::Ones(1, 1);
  StorageCertificate b;
  b.G = Matrix::Identity(2, 2);
  b.Ghat = Matrix::Ones(2, 1);
  b.H = Matrix::Ones(2, 1);
  const auto sol = solve_abstract_coupling(m, {a, b});
  CHECK_FALSE(sol.ok);
  CHECK(sol.residual > 1e-3);
}

TEST_CASE("solve_abstract_coupling: single decoupled subsystem") {
  StorageCertificate a;
  a.G = Matrix::Identity(2, 2);
  a.Ghat = Matrix::Identity(2, 2);
  a.H = Matrix::Identity(2, 2);
  const auto sol = solve_abstract_coupling(Matrix::Zero(2, 2), {a});
  CHECK(sol.ok);
  CHECK(sol.Mhat.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("compose: case-study parameters in both modes") {
  const Index ni = 74;
  const std::vector<SystemModel> concs(3, case_concrete(ni));
  const SystemModel abst = case_abstract();
  const std::vector<StorageCertificate> certs(3, case_certificate(ni));
  std::vector<SsfParams> params;
  for (int i = 0; i < 3; ++i) params.push_back(derive_params(concs[i], abst, certs[i]));
  const std::vector<double> mu(3, 1.0);

  const ComposedSsf gen = compose(certs, params, mu, ComposeMode::Generic);
  CHECK(gen.params.alpha_coeff == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(gen.params.kappa_lin == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(gen.params.rho_coeff == doctest::Approx(0.0));
  CHECK(gen.params.psi == doctest::Approx(3 * 74 * 0.007 * 0.007).epsilon(1e-12));

  const ComposedSsf quad =
      compose(certs, params, mu, ComposeMode::QuadraticSpecialized, &concs);
  CHECK(quad.params.alpha_coeff == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(quad.params.psi == gen.params.psi);

  // N = 1 is the identity in both modes
  const ComposedSsf one_gen = compose({certs[0]}, {params[0]}, {1.0}, ComposeMode::Generic);
  const std::vector<SystemModel> one_model{concs[0]};
  const ComposedSsf one_quad = compose({certs[0]}, {params[0]}, {1.0},
                                       ComposeMode::QuadraticSpecialized, &one_model);
  CHECK(one_gen.params.alpha_coeff == doctest::Approx(params[0].alpha_coeff));
  CHECK(one_quad.params.alpha_coeff == doctest::Approx(params[0].alpha_coeff));
  CHECK(one_gen.params.kappa_lin == params[0].kappa_lin);
  CHECK(one_gen.params.psi == params[0].psi);

  CHECK_THROWS_AS(compose(certs, params, mu, ComposeMode::QuadraticSpecialized, nullptr),
                  InvalidParameterError);
}

TEST_CASE("composed psi is the exact weighted sum") {
  std::vector<SsfParams> params(3);
  params[0] = {1.0, 0.10, 0.0, 0.125};
  params[1] = {2.0, 0.20, 0.1, 0.0625};
  params[2] = {0.5, 0.05, 0.3, 0.25};
  const std::vector<StorageCertificate> certs(3, case_certificate(2));
  const std::vector<double> mu{2.0, 4.0, 0.5};
  const ComposedSsf c = compose(certs, params, mu, ComposeMode::Generic);
  // exactly representable summands: no roundoff drift at all here
  CHECK(c.params.psi == 2.0 * 0.125 + 4.0 * 0.0625 + 0.5 * 0.25);
}

TEST_CASE("closed-form composition matches the grid-search oracle") {
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> unif(0.2, 3.0);
  for (int trial = 0; trial < 6; ++trial) {
    const int n = trial % 2 == 0 ? 2 : 3;
    std::vector<SsfParams> params(n);
    std::vector<double> mu(n);
    for (int i = 0; i < n; ++i) {
      params[i].alpha_coeff = unif(rng);
      params[i].kappa_lin = 0.05 + 0.2 * unif(rng) / 3.0;
      params[i].rho_coeff = unif(rng);
      params[i].psi = 0.0;
      mu[i] = unif(rng);
    }
    const std::vector<StorageCertificate> certs(n, case_certificate(2));
    const ComposedSsf c = compose(certs, params, mu, ComposeMode::Generic);

    const double r = 1.7;

    // kappa(r) = min sum mu_i kappa_i s_i  s.t. sum mu_i s_i = r  (vertex optimum)
    double kappa_best = std::numeric_limits<double>::infinity();
    const int grid = 200;
    if (n == 2) {
      for (int i = 0; i <= grid; ++i) {
        const double s0 = r / mu[0] * i / grid;
        const double s1 = (r - mu[0] * s0) / mu[1];
        if (s1 < -1e-12) continue;
        kappa_best = std::min(kappa_best, mu[0] * params[0].kappa_lin * s0 +
                                              mu[1] * params[1].kappa_lin * std::max(0.0, s1));
      }
    } else {
      for (int i = 0; i <= grid; ++i) {
        for (int j = 0; i + j <= grid; ++j) {
          const double s0 = r / mu[0] * i / grid;
          const double s1 = r / mu[1] * j / grid;
          const double rem = r - mu[0] * s0 - mu[1] * s1;
          if (rem < -1e-12) continue;
          const double s2 = std::max(0.0, rem) / mu[2];
          kappa_best = std::min(kappa_best,
                                mu[0] * params[0].kappa_lin * s0 +
                                    mu[1] * params[1].kappa_lin * s1 +
                                    mu[2] * params[2].kappa_lin * s2);
        }
      }
    }
    CHECK(c.params.kappa_lin * r == doctest::Approx(kappa_best).epsilon(1e-6));

    // rho(r) = max sum mu_i rho_i s_i^2  s.t. ||s|| = r  (vertex optimum)
    double rho_best = 0.0;
    for (int i = 0; i < n; ++i) rho_best = std::max(rho_best, mu[i] * params[i].rho_coeff * r * r);
    CHECK(c.params.rho_coeff * r * r == doctest::Approx(rho_best).epsilon(1e-12));

    // alpha: maximize sum alpha_i^{-1}(s_i) on the simplex, then invert.
    // Interior optimum: coarse grid plus golden-section refinement on the
    // 2-subsystem case; for n = 3 reduce over one axis with the closed pair
    // relation checked recursively through n = 2 grids.
    if (n == 2) {
      auto value = [&](double s0) {
        const double s1 = (r - mu[0] * s0) / mu[1];
        if (s1 < 0.0) return -1.0;
        return std::sqrt(s0 / params[0].alpha_coeff) + std::sqrt(s1 / params[1].alpha_coeff);
      };
      double best_s = 0.0, best_v = -1.0;
      for (int i = 0; i <= grid; ++i) {
        const double s0 = r / mu[0] * i / grid;
        const double v = value(s0);
        if (v > best_v) {
          best_v = v;
          best_s = s0;
        }
      }
      double lo = std::max(0.0, best_s - r / mu[0] / grid);
      double hi = std::min(r / mu[0], best_s + r / mu[0] / grid);
      const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
      for (int it = 0; it < 120; ++it) {
        const double m1 = hi - phi * (hi - lo);
        const double m2 = lo + phi * (hi - lo);
        if (value(m1) < value(m2)) {
          lo = m1;
        } else {
          hi = m2;
        }
      }
      const double alpha_bar_r = value(0.5 * (lo + hi));
      // closed form: alpha_bar(r) = sqrt(C r), alpha(eps) = eps^2 / C
      const double cc = 1.0 / c.params.alpha_coeff;
      CHECK(alpha_bar_r == doctest::Approx(std::sqrt(cc * r)).epsilon(1e-6));
    }
  }
}

TEST_CASE("compose_checked rejects failing networks") {
  const Index ni = 4;  // small network: tau n > 1, the LMI genuinely fails
  const Index n = 3 * ni;
  const std::vector<SystemModel> concs(3, case_concrete(ni));
  const std::vector<StorageCertificate> certs(3, case_certificate(ni));
  std::vector<SsfParams> params(3);
  for (int i = 0; i < 3; ++i) {
    params[i] = derive_params(concs[i], case_abstract(), certs[i]);
  }
  const double bad_tau = 2.5 / static_cast<double>(n - 1);
  const Matrix bad = -bad_tau * complete_graph_laplacian(n);
  CHECK_THROWS_AS(compose_checked(bad, certs, params, {1.0, 1.0, 1.0},
                                  ComposeMode::Generic),
                  NotVerifiedError);
}

TEST_CASE("composed one-step dissipation holds in Monte Carlo mean") {
  const Index ni = 4;
  const Index n = 3 * ni;
  // tau small enough for the LMI at this size
  const double tau = 0.5 / static_cast<double>(n - 1);
  Network net = case_concrete_network(ni);
  net.M = -tau * complete_graph_laplacian(n);
  Network anet = case_abstract_network();
  const std::vector<StorageCertificate> certs(3, case_certificate(ni));
  const std::vector<double> mu(3, 1.0);
  std::vector<SsfParams> params;
  for (int i = 0; i < 3; ++i) {
    params.push_back(derive_params(net.subsystems[i], anet.subsystems[i], certs[i]));
  }
  REQUIRE(check_lmi(net.M, certs, mu).ok);
  const auto coupling = solve_abstract_coupling(net.M, certs);
  REQUIRE(coupling.ok);
  const ComposedSsf composed = compose(certs, params, mu, ComposeMode::Generic);

  SimSetup setup;
  setup.concrete = net;
  setup.abstracted = anet;
  setup.certs = certs;
  setup.Mhat = coupling.Mhat;
  setup.policy = constant_policy(Vector::Zero(3), 0.0);
  setup.x0 = Vector::Zero(n);
  setup.xhat0 = Vector::Zero(3);
  setup.Td = 1;

  std::mt19937_64 rng(9000);
  std::uniform_real_distribution<double> unif(-6.0, 6.0);
  std::vector<Vector> xs, xhats, nuhats;
  for (int s = 0; s < 5; ++s) {
    Vector xhat(3), x(n), nuhat(3);
    for (Index i = 0; i < 3; ++i) xhat(i) = unif(rng);
    for (Index b = 0; b < 3; ++b) {
      for (Index i = 0; i < ni; ++i) x(b * ni + i) = xhat(b) + 0.3 * unif(rng);
    }
    for (Index i = 0; i < 3; ++i) nuhat(i) = 0.5 * unif(rng);
    xs.push_back(x);
    xhats.push_back(xhat);
    nuhats.push_back(nuhat);
  }
  RngStream noise(31337);
  const auto report = check_supermartingale(setup, composed.params, mu, xs, xhats,
                                            nuhats, 100000, noise);
  CHECK(report.passed);
}
