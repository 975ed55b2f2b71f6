#include "simcert/pipeline.hpp"

#include <cstdio>
#include <ostream>

namespace simcert {

using nlohmann::json;

CompiledSpec compile_spec(const SpecConfig& spec) {
  CompiledSpec out;
  FormulaPtr f = parse_scltl(spec.formula_text);
  if (spec.bounded_always) {
    const auto& [operand_text, horizon] = *spec.bounded_always;
    FormulaPtr operand = parse_scltl(operand_text);
    f = make_and(bounded_always(operand, horizon), f);
  }
  out.ast = f;
  out.atomic_props = spec.atomic_props;
  out.dfa = compile_dfa(f, spec.atomic_props);
  out.absorbed = absorb_dfa(out.dfa);
  return out;
}

VerifyOutcome run_verify(const ProjectConfig& config, double tol) {
  VerifyOutcome out;
  out.passed = true;
  for (std::size_t i = 0; i < config.certificates.size(); ++i) {
    CheckReport r = verify_storage(config.concretes[i], config.abstracts[i],
                                   config.certificates[i], tol);
    out.passed = out.passed && r.passed;
    out.reports.push_back(std::move(r));
  }
  if (out.passed) {
    for (std::size_t i = 0; i < config.certificates.size(); ++i) {
      out.params.push_back(derive_params(config.concretes[i], config.abstracts[i],
                                         config.certificates[i], tol));
    }
  }
  return out;
}

ComposeOutcome run_compose(const ProjectConfig& config, const VerifyOutcome& verify,
                           double tol) {
  if (!verify.passed) {
    throw NotVerifiedError("compose: certificates not verified");
  }
  ComposeOutcome out;
  out.lmi = check_lmi(config.M, config.certificates, config.mu, tol);
  out.coupling = solve_abstract_coupling(config.M, config.certificates, tol);
  out.generic = compose(config.certificates, verify.params, config.mu,
                        ComposeMode::Generic);
  out.quadratic = compose(config.certificates, verify.params, config.mu,
                          ComposeMode::QuadraticSpecialized, &config.concretes);
  out.passed = out.lmi.ok && out.coupling.ok;
  return out;
}

BoundOutcome run_bound(const ProjectConfig& config, const ComposeOutcome& compose,
                       double epsilon, long Td, double nuhat_sup) {
  BoundOutcome out;
  out.epsilon = epsilon;
  out.Td = Td;
  out.nuhat_sup = nuhat_sup;
  out.V0 = composed_storage_value(config.certificates, config.mu, config.mc.x0,
                                  config.mc.xhat0);
  BoundQuery q;
  q.V0 = out.V0;
  q.epsilon = epsilon;
  q.Td = Td;
  q.nuhat_sup = nuhat_sup;
  q.params = compose.quadratic.params;
  out.quadratic = finite_horizon_delta(q);
  q.params = compose.generic.params;
  out.generic = finite_horizon_delta(q);
  return out;
}

SimSetup make_sim_setup(const ProjectConfig& config, const Matrix& Mhat) {
  SimSetup setup;
  setup.concrete = config.concrete_network();
  setup.abstracted = config.abstract_network();
  setup.certs = config.certificates;
  setup.Mhat = Mhat;
  setup.policy = config.policy;
  setup.x0 = config.mc.x0;
  setup.xhat0 = config.mc.xhat0;
  setup.Td = config.spec.horizon;
  return setup;
}

SimulateOutcome run_simulate(const ProjectConfig& config, const ComposeOutcome& compose,
                             const CompiledSpec& spec, long trials, std::uint64_t seed,
                             ComposeMode alpha_mode) {
  SimulateOutcome out;
  const SsfParams& headline = alpha_mode == ComposeMode::QuadraticSpecialized
                                  ? compose.quadratic.params
                                  : compose.generic.params;
  const SimSetup setup = make_sim_setup(config, compose.coupling.Mhat);
  out.batch = run_batch(setup, trials, seed);

  const std::vector<double> sups = sup_errors(out.batch);
  double total = 0.0, worst = 0.0;
  for (double s : sups) {
    total += s;
    worst = std::max(worst, s);
  }
  out.sup_error_mean = total / static_cast<double>(sups.size());
  out.sup_error_p90 = empirical_quantile(sups, 0.90);
  out.sup_error_max = worst;

  const long Td = config.spec.horizon;
  for (double eps : config.mc.eps_grid) {
    ExceedRow row;
    row.epsilon = eps;
    row.empirical = estimate_sup_error(out.batch, eps);
    BoundQuery q;
    q.V0 = composed_storage_value(config.certificates, config.mu, config.mc.x0,
                                  config.mc.xhat0);
    q.epsilon = eps;
    q.Td = Td;
    q.nuhat_sup = config.policy.saturation;
    q.params = compose.quadratic.params;
    row.delta_quadratic = finite_horizon_delta(q).delta;
    q.params = compose.generic.params;
    row.delta_generic = finite_horizon_delta(q).delta;
    const double headline_delta = alpha_mode == ComposeMode::QuadraticSpecialized
                                      ? row.delta_quadratic
                                      : row.delta_generic;
    const double half = 0.5 * (row.empirical.ci.hi - row.empirical.ci.lo);
    row.bound_respected = row.empirical.p <= headline_delta + 2.0 * half;
    out.exceed.push_back(row);
  }

  // specification transfer at the configured epsilon
  const LabeledPartition deflated = deflate_labeling(config.spec.labeling,
                                                     config.spec.epsilon);
  const InflatedLabeling inflated = inflate_labeling(config.spec.labeling,
                                                     config.spec.epsilon);
  out.abstract_sat_eps = estimate_satisfaction(out.batch, spec.absorbed, deflated, Td,
                                               TrajectorySide::Abstract);
  out.concrete_sat = estimate_satisfaction(out.batch, spec.dfa, config.spec.labeling,
                                           Td, TrajectorySide::Concrete);
  out.abstract_sat_infl = estimate_satisfaction_multi(out.batch, spec.dfa, inflated, Td,
                                                      TrajectorySide::Abstract);

  BoundQuery q;
  q.V0 = composed_storage_value(config.certificates, config.mu, config.mc.x0,
                                config.mc.xhat0);
  q.epsilon = config.spec.epsilon;
  q.Td = Td;
  q.nuhat_sup = config.policy.saturation;
  q.params = headline;
  out.delta_for_spec = finite_horizon_delta(q).delta;
  out.lower_bound = transfer_probability(out.abstract_sat_eps.p, out.delta_for_spec,
                                         TransferDirection::Lower);
  out.upper_bound = transfer_probability(out.abstract_sat_infl.p, out.delta_for_spec,
                                         TransferDirection::Upper);
  return out;
}

void write_trajectory_csv(const TrajectoryBatch& batch, std::ostream& out) {
  if (batch.runs.empty()) throw EmptyBatchError("write_trajectory_csv: empty batch");
  const Index q = batch.runs.front().y.front().size();
  out << "trial,k";
  for (Index i = 0; i < q; ++i) out << ",y" << i;
  for (Index i = 0; i < q; ++i) out << ",yhat" << i;
  out << ",sup_so_far\n";
  char buf[64];
  for (std::size_t t = 0; t < batch.runs.size(); ++t) {
    const auto& run = batch.runs[t];
    double sup = 0.0;
    for (std::size_t k = 0; k < run.y.size(); ++k) {
      sup = std::max(sup, (run.y[k] - run.yhat[k]).norm());
      out << t << "," << k;
      for (Index i = 0; i < q; ++i) {
        std::snprintf(buf, sizeof buf, "%.12g", run.y[k](i));
        out << "," << buf;
      }
      for (Index i = 0; i < q; ++i) {
        std::snprintf(buf, sizeof buf, "%.12g", run.yhat[k](i));
        out << "," << buf;
      }
      std::snprintf(buf, sizeof buf, "%.12g", sup);
      out << "," << buf << "\n";
    }
  }
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

namespace {

json params_json(const SsfParams& p) {
  return {{"alpha_coeff", p.alpha_coeff},
          {"kappa_lin", p.kappa_lin},
          {"rho_coeff", p.rho_coeff},
          {"psi", p.psi}};
}

json bound_entry(const ProbabilityBound& b) {
  const char* branch = b.branch == BoundBranch::HighThreshold ? "high-threshold"
                       : b.branch == BoundBranch::LowThreshold ? "low-threshold"
                                                               : "infinite";
  return {{"delta", b.delta},
          {"delta_raw", b.delta_raw},
          {"branch", branch},
          {"psi_hat", b.psi_hat}};
}

json estimate_json(const EstimateResult& e) {
  return {{"p", e.p}, {"count", e.count}, {"trials", e.trials},
          {"ci", {e.ci.lo, e.ci.hi}}};
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

json verify_json(const VerifyOutcome& v) {
  json certs = json::array();
  for (const auto& r : v.reports) {
    json conds = json::array();
    for (const auto& c : r.conditions) {
      conds.push_back({{"name", c.name},
                       {"residual", c.residual},
                       {"threshold", c.threshold},
                       {"passed", c.passed}});
    }
    certs.push_back({{"passed", r.passed}, {"conditions", std::move(conds)}});
  }
  json params = json::array();
  for (const auto& p : v.params) params.push_back(params_json(p));
  return {{"passed", v.passed}, {"certificates", std::move(certs)},
          {"params", std::move(params)}};
}

json compose_json(const ComposeOutcome& c) {
  return {{"passed", c.passed},
          {"lmi", {{"ok", c.lmi.ok}, {"lambda_max", c.lmi.lambda_max}}},
          {"coupling",
           {{"ok", c.coupling.ok},
            {"residual", c.coupling.residual},
            {"Mhat", matrix_json(c.coupling.Mhat)}}},
          {"params_generic", params_json(c.generic.params)},
          {"params_quadratic", params_json(c.quadratic.params)}};
}

json bound_json(const BoundOutcome& b) {
  return {{"V0", b.V0},
          {"epsilon", b.epsilon},
          {"Td", b.Td},
          {"nuhat_sup", b.nuhat_sup},
          {"quadratic", bound_entry(b.quadratic)},
          {"generic", bound_entry(b.generic)}};
}

json simulate_json(const SimulateOutcome& s) {
  json exceed = json::array();
  for (const auto& row : s.exceed) {
    exceed.push_back({{"epsilon", row.epsilon},
                      {"empirical", estimate_json(row.empirical)},
                      {"delta_quadratic", row.delta_quadratic},
                      {"delta_generic", row.delta_generic},
                      {"bound_respected", row.bound_respected}});
  }
  return {{"trials", s.batch.trials},
          {"seed", s.batch.seed},
          {"sup_error",
           {{"mean", s.sup_error_mean}, {"p90", s.sup_error_p90}, {"max", s.sup_error_max}}},
          {"exceed", std::move(exceed)},
          {"satisfaction",
           {{"abstract_deflated", estimate_json(s.abstract_sat_eps)},
            {"concrete_plain", estimate_json(s.concrete_sat)},
            {"abstract_inflated", estimate_json(s.abstract_sat_infl)},
            {"delta", s.delta_for_spec},
            {"lower_bound", s.lower_bound},
            {"upper_bound", s.upper_bound}}}};
}

namespace {

void render(const json& node, const std::string& prefix, std::string& out) {
  if (node.is_object()) {
    for (const auto& [key, value] : node.items()) {
      render(value, prefix.empty() ? key : prefix + "." + key, out);
    }
  } else if (node.is_array()) {
    std::size_t i = 0;
    for (const auto& value : node) {
      render(value, prefix + "[" + std::to_string(i++) + "]", out);
    }
  } else if (node.is_number_float()) {
    out += prefix + " = " + format_number(node.get<double>()) + "\n";
  } else {
    out += prefix + " = " + node.dump() + "\n";
  }
}

}  // namespace

std::string render_text(const json& report) {
  std::string out;
  render(report, "", out);
  return out;
}

std::string render_check_table(const VerifyOutcome& v) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-4s %-18s %14s %14s %s\n", "cert", "condition",
                "residual", "threshold", "status");
  out += line;
  for (std::size_t i = 0; i < v.reports.size(); ++i) {
    for (const auto& c : v.reports[i].conditions) {
      std::snprintf(line, sizeof line, "%-4zu %-18s %14.6g %14.6g %s\n", i,
                    c.name.c_str(), c.residual, c.threshold,
                    c.passed ? "pass" : "FAIL");
      out += line;
    }
  }
  out += v.passed ? "all certificates verified\n" : "certificate verification FAILED\n";
  return out;
}

}  // namespace simcert
