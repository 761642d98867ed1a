// Command-line front end: run experiments, generate instances, falsify
// smoothness conditions and run Monte-Carlo contract checks.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "c2mab/environments.hpp"
#include "c2mab/harness.hpp"
#include "c2mab/io.hpp"
#include "c2mab/rng.hpp"
#include "c2mab/smoothness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitViolation = 1;
constexpr int kExitUsage = 2;

struct RunArgs {
  std::string config;
  std::string out;
  int workers = 1;
};

struct GenArgs {
  std::string kind;
  int m = 0;
  int k = 0;
  int d = 0;
  std::uint64_t seed = 0;
  std::string out;
};

struct CheckArgs {
  std::string env;
  std::string condition;
  double b1 = 1.0;
  double bv = 0.0;
  double lambda = 0.0;
  double bp = 1.0;
  long trials = 10000;
  int decomps = 8;
  std::uint64_t seed = 0;
};

struct ContractArgs {
  std::string env;
  long samples = 100000;
  int actions = 5;
  std::uint64_t seed = 0;
};

int do_run(const RunArgs& a) {
  auto cfg = c2mab::load_experiment_config(a.config);
  if (!a.out.empty()) cfg.output_directory = a.out;
  if (cfg.output_directory.empty()) throw c2mab::InputError("no output directory: pass --out or set output_directory");
  const auto result = c2mab::run_experiment(cfg, a.workers);
  c2mab::write_outputs(result, cfg.output_directory);
  for (const auto& t : result.traces) {
    std::cerr << t.policy << " seed " << t.seed << ": cumulative regret " << t.cum_regret.back() << " ("
              << static_cast<long>(t.wall_ms) << " ms)\n";
  }
  if (!result.contracts_pass) {
    std::cerr << "Monte-Carlo contract check failed, see contracts.json\n";
    return kExitViolation;
  }
  return kExitOk;
}

int do_gen(const GenArgs& a) {
  if (a.kind != "cascade-synthetic") throw c2mab::InputError("unsupported --kind '" + a.kind + "'");
  c2mab::Rng rng(a.seed);
  const auto inst = c2mab::gen_synthetic_cascade(a.m, a.k, a.d, rng);
  c2mab::save_env_file(*inst.env, a.out);
  return kExitOk;
}

int do_check(const CheckArgs& a) {
  const auto env = c2mab::resolve_env(a.env);
  const auto kind = c2mab::parse_condition_kind(a.condition);
  c2mab::Coefficients coeffs{a.b1, a.bv, a.lambda, a.bp};
  c2mab::CheckOptions opt;
  opt.trials = a.trials;
  opt.decomps_per_trial = a.decomps;
  c2mab::Rng rng(a.seed);
  const auto report = c2mab::check_condition(*env, kind, coeffs, opt, rng);
  std::cout << c2mab::to_json(report).dump(2) << '\n';
  return report.pass ? kExitOk : kExitViolation;
}

int do_contract(const ContractArgs& a) {
  const auto env = c2mab::resolve_env(a.env);
  if (!env->analytic_exact()) {
    throw c2mab::InputError("environment uses Monte-Carlo analytic values; the contract check needs exact ones");
  }
  c2mab::Rng rng(a.seed);
  const auto mu = env->means(env->context(1, rng));
  nlohmann::json reports = nlohmann::json::array();
  bool pass = true;
  for (int i = 0; i < a.actions; ++i) {
    const auto rep = c2mab::contract_check(*env, env->random_action(rng), mu, a.samples, rng);
    pass = pass && rep.pass;
    reports.push_back(c2mab::to_json(rep));
  }
  std::cout << reports.dump(2) << '\n';
  return pass ? kExitOk : kExitViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contextual combinatorial bandits with probabilistically triggered arms"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run an experiment config and write CSV/JSON outputs");
  run_cmd->add_option("--config", run.config, "TOML experiment config")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--out", run.out, "Output directory (overrides output_directory)");
  run_cmd->add_option("--workers", run.workers, "Worker threads")->check(CLI::PositiveNumber);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate an environment instance as JSON");
  gen_cmd->add_option("--kind", gen.kind, "Instance family")->required();
  gen_cmd->add_option("--m", gen.m, "Number of items")->required()->check(CLI::PositiveNumber);
  gen_cmd->add_option("--k", gen.k, "Slate size")->required()->check(CLI::PositiveNumber);
  gen_cmd->add_option("--d", gen.d, "Feature dimension")->required()->check(CLI::PositiveNumber);
  gen_cmd->add_option("--seed", gen.seed, "Generator seed")->required();
  gen_cmd->add_option("--out", gen.out, "Output JSON file")->required();

  CheckArgs check;
  auto* check_cmd = app.add_subcommand("check", "Search for violations of a smoothness condition");
  check_cmd->add_option("--env", check.env, "Environment JSON file or builtin name")->required();
  check_cmd->add_option("--condition", check.condition, "mono, tpm, vm, tpvm or tp-smooth")
      ->required()
      ->check(CLI::IsMember({"mono", "tpm", "vm", "tpvm", "tp-smooth"}));
  check_cmd->add_option("--b1", check.b1, "B1 coefficient");
  check_cmd->add_option("--bv", check.bv, "Bv coefficient");
  check_cmd->add_option("--lambda", check.lambda, "Triggering exponent lambda");
  check_cmd->add_option("--bp", check.bp, "Bp coefficient");
  check_cmd->add_option("--trials", check.trials, "Random trials")->required()->check(CLI::PositiveNumber);
  check_cmd->add_option("--decomps", check.decomps, "Random zeta/eta splits per trial")->check(CLI::NonNegativeNumber);
  check_cmd->add_option("--seed", check.seed, "RNG seed")->required();

  ContractArgs contract;
  auto* contract_cmd = app.add_subcommand("contract", "Compare Monte-Carlo play statistics with analytic values");
  contract_cmd->add_option("--env", contract.env, "Environment JSON file or builtin name")->required();
  contract_cmd->add_option("--samples", contract.samples, "Plays per action")->required()->check(CLI::Range(2L, 100000000L));
  contract_cmd->add_option("--actions", contract.actions, "Random actions to check")->check(CLI::PositiveNumber);
  contract_cmd->add_option("--seed", contract.seed, "RNG seed")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run_cmd) return do_run(run);
    if (*gen_cmd) return do_gen(gen);
    if (*check_cmd) return do_check(check);
    if (*contract_cmd) return do_contract(contract);
  } catch (const std::exception& e) {
    // Config, input and argument errors all end up here.
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
