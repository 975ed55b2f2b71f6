#include "simcert/systems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace simcert {

Nonlinearity Nonlinearity::zero() {
  // no nonlinearity constrains nothing; the certificate's 2/b entry degenerates to 0
  return Nonlinearity(NonlinKind::Zero, std::numeric_limits<double>::infinity(), 0.0);
}

Nonlinearity Nonlinearity::sine() { return Nonlinearity(NonlinKind::Sine, 1.0, 0.0); }

Nonlinearity Nonlinearity::table(std::vector<std::pair<double, double>> points,
                                 double slope_bound, double shift) {
  if (points.size() < 2) {
    throw InvalidParameterError("table nonlinearity needs at least two sample points");
  }
  if (!(slope_bound > 0.0)) {
    throw InvalidParameterError("table nonlinearity: slope_bound must be positive");
  }
  std::sort(points.begin(), points.end());
  // Spot-check the declared slope interval [shift, shift + slope_bound] on
  // every segment; the declaration is a modeling assumption, this only
  // catches tables that plainly violate it.
  constexpr double kSlack = 1e-9;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    const double dx = points[i + 1].first - points[i].first;
    if (dx <= 0.0) {
      throw InvalidParameterError("table nonlinearity: sample points must have distinct x");
    }
    const double slope = (points[i + 1].second - points[i].second) / dx;
    if (slope < shift - kSlack || slope > shift + slope_bound + kSlack) {
      throw InvalidParameterError("table nonlinearity: segment slope " +
                                  std::to_string(slope) +
                                  " outside declared interval");
    }
  }
  Nonlinearity n(NonlinKind::Table, slope_bound, shift);
  n.points_ = std::move(points);
  return n;
}

double Nonlinearity::operator()(double r) const {
  switch (kind_) {
    case NonlinKind::Zero:
      return 0.0;
    case NonlinKind::Sine:
      return std::sin(r);
    case NonlinKind::Table: {
      // Constant extension outside the sampled range (slope 0 is admissible).
      if (r <= points_.front().first) return points_.front().second;
      if (r >= points_.back().first) return points_.back().second;
      auto hi = std::upper_bound(points_.begin(), points_.end(), r,
                                 [](double v, const auto& p) { return v < p.first; });
      auto lo = hi - 1;
      const double t = (r - lo->first) / (hi->first - lo->first);
      return lo->second + t * (hi->second - lo->second);
    }
  }
  return 0.0;
}

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw DimensionError(msg);
}

}  // namespace

void SystemModel::validate() const {
  const Index n = A.rows();
  require(A.cols() == n, "SystemModel: A must be square");
  require(B.rows() == n, "SystemModel: B row count != state dim");
  require(C1.cols() == n, "SystemModel: C1 column count != state dim");
  require(C2.cols() == n, "SystemModel: C2 column count != state dim");
  require(D.rows() == n, "SystemModel: D row count != state dim");
  require(E.rows() == n, "SystemModel: E row count != state dim");
  require(E.cols() == 1, "SystemModel: E must be a single column (scalar phi)");
  require(F.rows() == 1, "SystemModel: F must have one row (scalar phi)");
  require(F.cols() == n, "SystemModel: F column count != state dim");
  require(R.rows() == n, "SystemModel: R row count != state dim");
  for (const Matrix* m : {&A, &B, &C1, &C2, &D, &E, &F, &R}) {
    if (!all_finite(*m)) throw InvalidParameterError("SystemModel: non-finite entry");
  }
}

Vector step(const SystemModel& model, const Vector& x, const Vector& nu,
            const Vector& w, const Vector& zeta) {
  require(x.size() == model.state_dim(), "step: state dimension mismatch");
  require(nu.size() == model.ext_input_dim(), "step: external input dimension mismatch");
  require(w.size() == model.int_input_dim(), "step: internal input dimension mismatch");
  require(zeta.size() == model.noise_dim(), "step: noise dimension mismatch");
  Vector next = model.A * x + model.B * nu + model.D * w;
  next += model.E * model.phi((model.F * x)(0));
  if (model.noise_dim() > 0) next += model.R * zeta;
  return next;
}

std::pair<Vector, Vector> outputs(const SystemModel& model, const Vector& x) {
  require(x.size() == model.state_dim(), "outputs: state dimension mismatch");
  return {model.C1 * x, model.C2 * x};
}

Index Network::state_dim() const {
  Index n = 0;
  for (const auto& s : subsystems) n += s.state_dim();
  return n;
}

Index Network::ext_input_dim() const {
  Index n = 0;
  for (const auto& s : subsystems) n += s.ext_input_dim();
  return n;
}

Index Network::ext_output_dim() const {
  Index n = 0;
  for (const auto& s : subsystems) n += s.ext_output_dim();
  return n;
}

Index Network::noise_dim() const {
  Index n = 0;
  for (const auto& s : subsystems) n += s.noise_dim();
  return n;
}

namespace {

std::vector<Index> offsets_of(const std::vector<SystemModel>& subs,
                              Index (SystemModel::*dim)() const) {
  std::vector<Index> off(subs.size() + 1, 0);
  for (std::size_t i = 0; i < subs.size(); ++i) off[i + 1] = off[i] + (subs[i].*dim)();
  return off;
}

}  // namespace

std::vector<Index> Network::state_offsets() const {
  return offsets_of(subsystems, &SystemModel::state_dim);
}
std::vector<Index> Network::ext_input_offsets() const {
  return offsets_of(subsystems, &SystemModel::ext_input_dim);
}
std::vector<Index> Network::ext_output_offsets() const {
  return offsets_of(subsystems, &SystemModel::ext_output_dim);
}
std::vector<Index> Network::noise_offsets() const {
  return offsets_of(subsystems, &SystemModel::noise_dim);
}

void Network::validate() const {
  require(!subsystems.empty(), "Network: no subsystems");
  Index total_int_out = 0, total_int_in = 0;
  for (const auto& s : subsystems) {
    s.validate();
    total_int_out += s.int_output_dim();
    total_int_in += s.int_input_dim();
  }
  require(M.cols() == total_int_out, "Network: M column count != sum of internal output dims");
  require(M.rows() == total_int_in, "Network: M row count != sum of internal input dims");
}

Vector Network::stacked_internal_outputs(const Vector& x) const {
  Vector h2(M.cols());
  Index xo = 0, ho = 0;
  for (const auto& s : subsystems) {
    h2.segment(ho, s.int_output_dim()) = s.C2 * x.segment(xo, s.state_dim());
    xo += s.state_dim();
    ho += s.int_output_dim();
  }
  return h2;
}

Vector network_step(const Network& net, const Vector& x, const Vector& nu,
                    const Vector& zeta) {
  require(x.size() == net.state_dim(), "network_step: state dimension mismatch");
  require(nu.size() == net.ext_input_dim(), "network_step: input dimension mismatch");
  require(zeta.size() == net.noise_dim(), "network_step: noise dimension mismatch");
  const Vector w = net.M * net.stacked_internal_outputs(x);
  Vector next(x.size());
  Index xo = 0, uo = 0, wo = 0, zo = 0;
  for (const auto& s : net.subsystems) {
    next.segment(xo, s.state_dim()) =
        step(s, x.segment(xo, s.state_dim()), nu.segment(uo, s.ext_input_dim()),
             w.segment(wo, s.int_input_dim()), zeta.segment(zo, s.noise_dim()));
    xo += s.state_dim();
    uo += s.ext_input_dim();
    wo += s.int_input_dim();
    zo += s.noise_dim();
  }
  return next;
}

Vector network_output(const Network& net, const Vector& x) {
  Vector y(net.ext_output_dim());
  Index xo = 0, yo = 0;
  for (const auto& s : net.subsystems) {
    y.segment(yo, s.ext_output_dim()) = s.C1 * x.segment(xo, s.state_dim());
    xo += s.state_dim();
    yo += s.ext_output_dim();
  }
  return y;
}

Matrix complete_graph_laplacian(Index n) {
  if (n < 2) throw InvalidParameterError("complete_graph_laplacian: need n >= 2");
  return static_cast<double>(n) * Matrix::Identity(n, n) - Matrix::Ones(n, n);
}

}  // namespace simcert
