#include "simcert/pipeline.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

using namespace simcert;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfigInvalid = 2;

struct OutputOptions {
  std::string out_dir;
  std::string format = "text";
  std::string alpha_mode = "quadratic";

  ComposeMode compose_mode() const {
    return alpha_mode == "generic" ? ComposeMode::Generic
                                   : ComposeMode::QuadraticSpecialized;
  }
};

void emit(const json& report, const OutputOptions& opts, const std::string& name) {
  if (opts.format == "json") {
    std::cout << report.dump(2) << "\n";
  } else {
    std::cout << render_text(report);
  }
  if (!opts.out_dir.empty()) {
    std::filesystem::create_directories(opts.out_dir);
    std::ofstream f(opts.out_dir + "/" + name + ".json");
    f << report.dump(2) << "\n";
    std::ofstream t(opts.out_dir + "/" + name + ".txt");
    t << render_text(report);
  }
}

ProjectConfig load_or_exit(const std::string& path) {
  try {
    return load_config(path);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    std::exit(kExitConfigInvalid);
  }
}

int cmd_verify(const std::string& config_path, double tol, const OutputOptions& opts) {
  const ProjectConfig config = load_or_exit(config_path);
  const VerifyOutcome v = run_verify(config, tol);
  if (opts.format == "text") {
    std::cout << render_check_table(v);
    if (!opts.out_dir.empty()) {
      std::filesystem::create_directories(opts.out_dir);
      std::ofstream f(opts.out_dir + "/verify.json");
      f << verify_json(v).dump(2) << "\n";
      std::ofstream t(opts.out_dir + "/verify.txt");
      t << render_check_table(v);
    }
  } else {
    emit(verify_json(v), opts, "verify");
  }
  return v.passed ? kExitOk : kExitCheckFailed;
}

int cmd_compose(const std::string& config_path, double tol, const OutputOptions& opts) {
  const ProjectConfig config = load_or_exit(config_path);
  const VerifyOutcome v = run_verify(config, tol);
  if (!v.passed) {
    emit(verify_json(v), opts, "verify");
    std::cerr << "certificate verification failed; cannot compose\n";
    return kExitCheckFailed;
  }
  const ComposeOutcome c = run_compose(config, v, tol);
  emit(compose_json(c), opts, "compose");
  return c.passed ? kExitOk : kExitCheckFailed;
}

int cmd_bound(const std::string& config_path, double tol, std::vector<double> eps,
              std::vector<long> horizons, double nuhat_sup, const OutputOptions& opts) {
  const ProjectConfig config = load_or_exit(config_path);
  const VerifyOutcome v = run_verify(config, tol);
  if (!v.passed) return kExitCheckFailed;
  const ComposeOutcome c = run_compose(config, v, tol);
  if (!c.passed) return kExitCheckFailed;
  if (eps.empty()) eps.push_back(config.spec.epsilon);
  if (horizons.empty()) horizons.push_back(config.spec.horizon);
  json rows = json::array();
  for (double e : eps) {
    for (long td : horizons) {
      rows.push_back(bound_json(run_bound(config, c, e, td, nuhat_sup)));
    }
  }
  emit(json{{"bounds", rows}}, opts, "bound");
  return kExitOk;
}

int cmd_simulate(const std::string& config_path, double tol, long trials,
                 std::uint64_t seed, bool have_trials, bool have_seed,
                 const OutputOptions& opts) {
  const ProjectConfig config = load_or_exit(config_path);
  const VerifyOutcome v = run_verify(config, tol);
  if (!v.passed) return kExitCheckFailed;
  const ComposeOutcome c = run_compose(config, v, tol);
  if (!c.passed) return kExitCheckFailed;
  const CompiledSpec spec = compile_spec(config.spec);
  const long n = have_trials ? trials : config.mc.trials;
  const std::uint64_t s = have_seed ? seed : config.mc.seed;
  const SimulateOutcome sim = run_simulate(config, c, spec, n, s, opts.compose_mode());
  emit(simulate_json(sim), opts, "simulate");
  if (!opts.out_dir.empty()) {
    std::ofstream csv(opts.out_dir + "/trajectories.csv");
    write_trajectory_csv(sim.batch, csv);
  }
  return kExitOk;
}

int cmd_casestudy(double tol, long trials, std::uint64_t seed, Index block_dim,
                  const OutputOptions& opts) {
  const ProjectConfig config = parse_config(case_study_json(block_dim, trials, seed));
  const VerifyOutcome v = run_verify(config, tol);
  json report;
  report["verify"] = verify_json(v);
  if (!v.passed) {
    emit(report, opts, "casestudy");
    return kExitCheckFailed;
  }
  const ComposeOutcome c = run_compose(config, v, tol);
  report["compose"] = compose_json(c);
  if (!c.passed) {
    emit(report, opts, "casestudy");
    return kExitCheckFailed;
  }
  report["bound"] = bound_json(
      run_bound(config, c, config.spec.epsilon, config.spec.horizon, config.policy.saturation));
  const CompiledSpec spec = compile_spec(config.spec);
  const SimulateOutcome sim = run_simulate(config, c, spec, config.mc.trials,
                                           config.mc.seed, opts.compose_mode());
  report["simulate"] = simulate_json(sim);
  emit(report, opts, "casestudy");
  if (!opts.out_dir.empty()) {
    std::ofstream csv(opts.out_dir + "/trajectories.csv");
    write_trajectory_csv(sim.batch, csv);
    std::ofstream cfg(opts.out_dir + "/case_study_config.json");
    cfg << config.raw.dump(2) << "\n";
    std::ofstream dot(opts.out_dir + "/specification.dot");
    dot << to_dot(spec.absorbed);
  }
  return kExitOk;
}

int cmd_sclts_compile(const std::string& formula, std::vector<std::string> props,
                      const std::string& bounded_operand, int bounded_horizon,
                      bool absorb, const std::string& out_path) {
  FormulaPtr f = parse_scltl(formula);
  if (!bounded_operand.empty()) {
    f = make_and(bounded_always(parse_scltl(bounded_operand), bounded_horizon), f);
  }
  if (props.empty()) props = collect_atoms(f);
  Dfa dfa = compile_dfa(f, props);
  if (absorb) dfa = absorb_dfa(dfa);
  const std::string dot = to_dot(dfa);
  if (out_path.empty()) {
    std::cout << dot;
  } else {
    std::ofstream out(out_path);
    out << dot;
  }
  std::cerr << "locations: " << dfa.num_locations()
            << ", letters: " << dfa.alphabet.size() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"storage-function certificate checker and abstraction toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  double tol = kDefaultTol;
  OutputOptions opts;

  auto add_common = [&](CLI::App* sub, bool with_config = true) {
    if (with_config) {
      sub->add_option("config", config_path, "project configuration (JSON)")->required();
    }
    sub->add_option("--tol", tol, "numeric tolerance");
    sub->add_option("--out", opts.out_dir, "output directory");
    sub->add_option("--format", opts.format, "text|json")
        ->check(CLI::IsMember({"text", "json"}));
    sub->add_option("--alpha-mode", opts.alpha_mode,
                    "composed alpha driving the headline bounds")
        ->check(CLI::IsMember({"quadratic", "generic"}));
  };

  auto* verify = app.add_subcommand("verify", "check storage-function certificates");
  add_common(verify);

  auto* compose = app.add_subcommand("compose", "check the network LMI and solve the abstract coupling");
  add_common(compose);

  std::vector<double> eps_list;
  std::vector<long> horizon_list;
  double nuhat_sup = 4.0;
  auto* bound = app.add_subcommand("bound", "evaluate closeness probability bounds");
  add_common(bound);
  bound->add_option("--eps", eps_list, "closeness levels");
  bound->add_option("--horizon", horizon_list, "time horizons");
  bound->add_option("--nuhat-sup", nuhat_sup, "sup-norm bound on the abstract input");

  long trials = 0;
  std::uint64_t seed = 0;
  auto* simulate = app.add_subcommand("simulate", "run the seeded Monte Carlo engine");
  add_common(simulate);
  auto* trials_opt = simulate->add_option("--trials", trials, "trial count");
  auto* seed_opt = simulate->add_option("--seed", seed, "base RNG seed");

  long cs_trials = 10000;
  std::uint64_t cs_seed = 20250810u;
  Index cs_block = 74;
  auto* casestudy = app.add_subcommand("casestudy", "bundled end-to-end case study");
  add_common(casestudy, false);
  casestudy->add_option("--trials", cs_trials, "trial count");
  casestudy->add_option("--seed", cs_seed, "base RNG seed");
  casestudy->add_option("--block-dim", cs_block, "per-subsystem state dimension");

  std::string formula, bounded_operand, dot_out;
  std::vector<std::string> props;
  int bounded_horizon = 0;
  bool absorb = false;
  auto* sclts = app.add_subcommand("sclts-compile", "compile an scLTL formula to a DFA (DOT)");
  sclts->add_option("--formula", formula, "scLTL formula text")->required();
  sclts->add_option("--props", props, "atomic propositions (default: atoms of the formula)")
      ->delimiter(',');
  sclts->add_option("--bounded-always", bounded_operand, "operand of a bounded-always conjunct");
  sclts->add_option("--bounded-horizon", bounded_horizon, "horizon of the bounded-always conjunct");
  sclts->add_flag("--absorb", absorb, "add the absorbing margin location");
  sclts->add_option("--out", dot_out, "DOT output path (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (verify->parsed()) return cmd_verify(config_path, tol, opts);
    if (compose->parsed()) return cmd_compose(config_path, tol, opts);
    if (bound->parsed()) {
      return cmd_bound(config_path, tol, eps_list, horizon_list, nuhat_sup, opts);
    }
    if (simulate->parsed()) {
      return cmd_simulate(config_path, tol, trials, seed, trials_opt->count() > 0,
                          seed_opt->count() > 0, opts);
    }
    if (casestudy->parsed()) return cmd_casestudy(tol, cs_trials, cs_seed, cs_block, opts);
    if (sclts->parsed()) {
      return cmd_sclts_compile(formula, props, bounded_operand, bounded_horizon, absorb,
                               dot_out);
    }
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kExitConfigInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCheckFailed;
  }
  return kExitOk;
}
