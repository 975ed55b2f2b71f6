#pragma once

#include "simcert/montecarlo.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>

namespace simcert {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SpecConfig {
  std::string formula_text;
  std::optional<std::pair<std::string, int>> bounded_always;  // operand, horizon
  std::vector<std::string> atomic_props;
  LabeledPartition labeling;
  double epsilon = 1.0;
  long horizon = 0;
};

struct McConfig {
  long trials = 0;
  std::uint64_t seed = 0;
  Vector x0, xhat0;
  std::vector<double> eps_grid;
};

struct ProjectConfig {
  std::vector<SystemModel> concretes;
  std::vector<SystemModel> abstracts;
  Matrix M;  // concrete coupling
  std::vector<StorageCertificate> certificates;
  std::vector<double> mu;
  SpecConfig spec;
  AbstractPolicy policy;
  McConfig mc;
  nlohmann::json raw;  // document as loaded; save() re-emits it unchanged

  Network concrete_network() const;
  Network abstract_network() const;
};

/// Matrix generator grammar: a nested array is a dense matrix; objects are
/// structured forms -- {"identity": n}, {"zeros": [r,c]}, {"ones": [r,c]},
/// {"scaled": [s, gen]}, {"basis_row": {"dim": n, "index": i}},
/// {"block_diag": [gen...]}, {"complete_graph_laplacian": n}.
Matrix parse_matrix(const nlohmann::json& j);

ProjectConfig parse_config(const nlohmann::json& j);
ProjectConfig load_config(const std::string& path);
void save_config(const ProjectConfig& config, const std::string& path);

/// The bundled 222 -> 3 dimensional case study (three sine-coupled blocks on
/// a complete graph); block_dim 74 reproduces the full-size instance, small
/// values give fast smoke-test variants.
nlohmann::json case_study_json(Index block_dim = 74, long trials = 10000,
                               std::uint64_t seed = 20250810u);

}  // namespace simcert
