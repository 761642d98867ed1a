#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "c2mab/model.hpp"
#include "c2mab/policies.hpp"
#include "c2mab/smoothness.hpp"

namespace c2mab {

enum class RegretReference {
  automatic,      // brute force when feasible, greedy on the true means otherwise
  brute_force,    // brute force only; infeasible action spaces are a config error
  greedy_on_true  // the environment's oracle applied to the true means
};

std::string to_string(RegretReference ref);
RegretReference parse_regret_reference(const std::string& name);

struct PolicySpec {
  std::string id;  // output file stem; defaults to the kind name
  PolicyKind kind = PolicyKind::c2ucbt;
  std::optional<double> gamma;
  std::optional<double> delta;
  double exploration_scale = 1.0;
};

/// Builds the environment for one run from the run's base seed. Instances
/// depend only on the seed, so every policy sees the same instance.
using EnvFactory = std::function<std::unique_ptr<Environment>(std::uint64_t seed)>;

struct ExperimentConfig {
  std::string env_kind;  // as written in the config, for reporting
  EnvFactory make_env;
  std::vector<PolicySpec> policies;
  long horizon = 1;
  std::vector<std::uint64_t> seeds;
  RegretReference regret_reference = RegretReference::automatic;
  std::filesystem::path output_directory;
  bool mc_contract_checks = false;

  /// Throws InputError on an invalid combination of fields.
  void validate() const;
};

/// Parses a TOML experiment config. Relative data paths are resolved against
/// the config file's directory. Unknown keys are rejected.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
ExperimentConfig parse_experiment_config(const std::string& toml_text, const std::filesystem::path& base_dir);

struct RegretTrace {
  std::string policy;
  std::uint64_t seed = 0;
  std::vector<double> inst_regret;  // raw per-round values
  std::vector<double> cum_regret;   // running sum of max(inst, 0)
  std::vector<std::string> actions;
  std::vector<double> realized_reward;
  double wall_ms = 0.0;  // not written to any output file
};

struct SummaryRow {
  std::string policy;
  std::vector<double> mean_cum;
  std::vector<double> std_cum;  // sample standard deviation across seeds, 0 for one seed
};

struct ExperimentResult {
  std::vector<RegretTrace> traces;  // sorted by (policy, seed)
  std::vector<SummaryRow> summary;  // sorted by policy
  std::vector<ContractReport> contracts;
  bool contracts_pass = true;
};

/// Reference value alpha*beta * r(S*; mu) for one mean vector.
double reference_value(const Environment& env, std::span<const double> mu, RegretReference ref);

/// One (policy, seed) run of T rounds. `policy_index` and `run_index` feed
/// derive_seed; the environment is built from the raw seed.
RegretTrace run_single(const ExperimentConfig& cfg, std::size_t policy_index, std::size_t run_index);

/// All (policy, seed) runs on a pool of `workers` threads. The result does
/// not depend on the number of workers.
ExperimentResult run_experiment(const ExperimentConfig& cfg, int workers = 1);

SummaryRow summarize(const std::string& policy, const std::vector<const RegretTrace*>& runs);

std::string trace_csv(const RegretTrace& trace);
nlohmann::json summary_json(const std::vector<SummaryRow>& rows);
std::string trace_file_name(const RegretTrace& trace);

/// Writes one CSV per run, summary.json and, when contract checks ran,
/// contracts.json.
void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir);

/// Shortest round-trip decimal form, identical on every platform.
std::string format_double(double x);

}  // namespace c2mab
