#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "simcert/bounds.hpp"

#include <cmath>
#include <random>

using namespace simcert;

namespace {

SsfParams case_params() {
  SsfParams p;
  p.alpha_coeff = 1.0;
  p.kappa_lin = 0.05;
  p.rho_coeff = 0.0;
  p.psi = 0.010878;
  return p;
}

}  // namespace

TEST_CASE("finite-horizon delta of the case study") {
  BoundQuery q;
  q.V0 = 0.0;
  q.epsilon = 1.0;
  q.Td = 10;
  q.nuhat_sup = 4.0;
  q.params = case_params();
  const ProbabilityBound b = finite_horizon_delta(q);
  CHECK(b.branch == BoundBranch::HighThreshold);
  CHECK(b.psi_hat == doctest::Approx(0.010878));
  // direct evaluation of the two-case formula, written out independently
  const double direct = 1.0 - (1.0 - 0.0 / 1.0) * std::pow(1.0 - 0.010878 / 1.0, 10.0);
  CHECK(b.delta == doctest::Approx(direct).epsilon(1e-14));
  CHECK(std::abs(b.delta - 0.103603) <= 1e-5);
}

TEST_CASE("degenerate and vacuous cases") {
  BoundQuery q;
  q.V0 = 0.0;
  q.epsilon = 2.0;
  q.Td = 25;
  q.params = case_params();
  q.params.psi = 0.0;
  CHECK(finite_horizon_delta(q).delta == 0.0);

  q.V0 = 10.0;  // V0 > alpha(eps): vacuous, clamped at one
  q.epsilon = 1.0;
  q.params = case_params();
  const ProbabilityBound b = finite_horizon_delta(q);
  CHECK(b.delta == 1.0);
  CHECK(b.delta_raw > 1.0);
}

TEST_CASE("the two branches agree at the switch point") {
  SsfParams p;
  p.alpha_coeff = 1.0;
  p.kappa_lin = 0.2;
  p.rho_coeff = 0.0;
  p.psi = 0.05;
  const double alpha_eps_switch = p.psi / p.kappa_lin;  // = 0.25
  const double eps = std::sqrt(alpha_eps_switch);
  const double v0 = 0.1;
  const long td = 7;

  // both branch formulas, written out directly
  const double high =
      1.0 - (1.0 - v0 / alpha_eps_switch) *
                std::pow(1.0 - p.psi / alpha_eps_switch, static_cast<double>(td));
  const double decay = std::pow(1.0 - p.kappa_lin, static_cast<double>(td));
  const double low = (v0 / alpha_eps_switch) * decay +
                     (p.psi / (p.kappa_lin * alpha_eps_switch)) * (1.0 - decay);
  CHECK(high == doctest::Approx(low).epsilon(1e-9));

  BoundQuery q{v0, eps, td, 0.0, p};
  const double at_switch = finite_horizon_delta(q).delta;
  q.epsilon = eps * (1.0 - 1e-9);
  const double below = finite_horizon_delta(q).delta;
  q.epsilon = eps * (1.0 + 1e-9);
  const double above = finite_horizon_delta(q).delta;
  CHECK(at_switch == doctest::Approx(below).epsilon(1e-6));
  CHECK(at_switch == doctest::Approx(above).epsilon(1e-6));
}

TEST_CASE("infinite-horizon bound") {
  SsfParams p;
  p.alpha_coeff = 1.0;
  p.kappa_lin = 0.05;
  p.rho_coeff = 0.0;
  p.psi = 0.0;
  CHECK(infinite_horizon_delta(0.0, 1.0, p) == 0.0);
  CHECK(infinite_horizon_delta(1.0, 1.0, p) == 1.0);
  CHECK(infinite_horizon_delta(0.25, 1.0, p) == doctest::Approx(0.25));
  SsfParams noisy = p;
  noisy.psi = 0.1;
  CHECK_THROWS_AS(infinite_horizon_delta(0.25, 1.0, noisy), InvalidParameterError);
}

TEST_CASE("invalid queries are rejected") {
  BoundQuery q;
  q.params = case_params();
  q.epsilon = 1.0;
  q.params.kappa_lin = 1.5;
  CHECK_THROWS_AS(finite_horizon_delta(q), InvalidParameterError);
  q.params = case_params();
  q.epsilon = 0.0;
  CHECK_THROWS_AS(finite_horizon_delta(q), InvalidParameterError);
  q.epsilon = 1.0;
  q.params.alpha_coeff = 0.0;
  CHECK_THROWS_AS(finite_horizon_delta(q), InvalidParameterError);
}

TEST_CASE("monotonicity of delta in every query dimension") {
  std::mt19937_64 rng(13579);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    BoundQuery q;
    q.V0 = unif(rng) * 0.8;
    q.epsilon = 0.2 + 2.0 * unif(rng);
    q.Td = 1 + static_cast<long>(unif(rng) * 30);
    q.nuhat_sup = 4.0 * unif(rng);
    q.params.alpha_coeff = 0.2 + unif(rng);
    q.params.kappa_lin = 0.01 + 0.9 * unif(rng);
    q.params.rho_coeff = 0.2 * unif(rng);
    q.params.psi = 0.2 * unif(rng);
    const double base = finite_horizon_delta(q).delta;

    BoundQuery longer = q;
    longer.Td += 3;
    CHECK(finite_horizon_delta(longer).delta >= base - 1e-12);

    BoundQuery noisier = q;
    noisier.params.psi += 0.1;
    CHECK(finite_horizon_delta(noisier).delta >= base - 1e-12);

    BoundQuery farther = q;
    farther.V0 += 0.1;
    CHECK(finite_horizon_delta(farther).delta >= base - 1e-12);

    BoundQuery looser = q;
    looser.epsilon *= 1.5;
    CHECK(finite_horizon_delta(looser).delta <= base + 1e-12);
  }
}
