#pragma once

#include "simcert/bounds.hpp"
#include "simcert/config.hpp"

#include <iosfwd>

namespace simcert {

struct CompiledSpec {
  FormulaPtr ast;
  std::vector<std::string> atomic_props;
  Dfa dfa;       // over 2^AP
  Dfa absorbed;  // with the margin letter / absorbing location
};

CompiledSpec compile_spec(const SpecConfig& spec);

struct VerifyOutcome {
  std::vector<CheckReport> reports;
  std::vector<SsfParams> params;
  bool passed = false;
};

VerifyOutcome run_verify(const ProjectConfig& config, double tol = kDefaultTol);

struct ComposeOutcome {
  LmiResult lmi;
  CouplingSolve coupling;
  ComposedSsf generic;
  ComposedSsf quadratic;
  bool passed = false;
};

ComposeOutcome run_compose(const ProjectConfig& config, const VerifyOutcome& verify,
                           double tol = kDefaultTol);

struct BoundOutcome {
  double V0 = 0.0;
  double epsilon = 0.0;
  long Td = 0;
  double nuhat_sup = 0.0;
  ProbabilityBound quadratic;
  ProbabilityBound generic;
};

BoundOutcome run_bound(const ProjectConfig& config, const ComposeOutcome& compose,
                       double epsilon, long Td, double nuhat_sup);

struct ExceedRow {
  double epsilon = 0.0;
  EstimateResult empirical;
  double delta_quadratic = 0.0;
  double delta_generic = 0.0;
  bool bound_respected = false;  // empirical p <= delta + 2 * ci half-width
};

struct SimulateOutcome {
  TrajectoryBatch batch;
  std::vector<ExceedRow> exceed;
  double sup_error_mean = 0.0;
  double sup_error_p90 = 0.0;
  double sup_error_max = 0.0;
  EstimateResult abstract_sat_eps;   // deflated labeling on the absorbed DFA
  EstimateResult concrete_sat;       // plain labeling on the plain DFA
  EstimateResult abstract_sat_infl;  // inflated multi-labeling, existential
  double delta_for_spec = 0.0;       // quadratic-alpha delta at spec epsilon
  double lower_bound = 0.0;          // max(0, p_hat - delta)
  double upper_bound = 1.0;          // min(1, p_infl + delta)
};

/// `alpha_mode` picks which composed alpha drives the headline deltas (the
/// exceed table and the specification transfer); both are always reported.
SimulateOutcome run_simulate(const ProjectConfig& config, const ComposeOutcome& compose,
                             const CompiledSpec& spec, long trials, std::uint64_t seed,
                             ComposeMode alpha_mode = ComposeMode::QuadraticSpecialized);

SimSetup make_sim_setup(const ProjectConfig& config, const Matrix& Mhat);

void write_trajectory_csv(const TrajectoryBatch& batch, std::ostream& out);

nlohmann::json verify_json(const VerifyOutcome& v);
nlohmann::json compose_json(const ComposeOutcome& c);
nlohmann::json bound_json(const BoundOutcome& b);
nlohmann::json simulate_json(const SimulateOutcome& s);

std::string render_text(const nlohmann::json& report);

/// Plain-text table of the per-certificate condition residuals.
std::string render_check_table(const VerifyOutcome& v);

/// Formats a double with 12 significant digits (report convention).
std::string format_number(double v);

}  // namespace simcert
