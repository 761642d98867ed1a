#pragma once

#include "json.hpp"
#include <optional>
#include <string>
#include <vector>

#include "c2mab/model.hpp"
#include "c2mab/rng.hpp"

namespace c2mab {

enum class ConditionKind { monotonicity, tpm, vm, tpvm, tp_smoothness };

std::string to_string(ConditionKind kind);
/// Accepts the CLI spellings "mono", "tpm", "vm", "tpvm", "tp-smooth".
ConditionKind parse_condition_kind(const std::string& name);

struct Coefficients {
  double b1 = 1.0;
  double bv = 0.0;
  double lambda = 0.0;
  double bp = 1.0;
};

/// One evaluated instance of a condition. `arm` is only used by the
/// triggering-probability smoothness check; zeta/eta only by VM and TPVM.
struct ConditionInstance {
  Action action;
  std::vector<double> mu;
  std::vector<double> mu_prime;
  std::vector<double> zeta;
  std::vector<double> eta;
  int arm = -1;
};

struct Sides {
  double lhs = 0.0;
  double rhs = 0.0;
};

/// Evaluates both sides of the condition for one instance from the
/// environment's analytic reward and triggering probabilities.
Sides evaluate_condition(const Environment& env, ConditionKind kind, const Coefficients& coeffs,
                         const ConditionInstance& instance);

/// LHS / RHS with the RHS inflated by a relative 1e-9 and floored at 1e-12.
/// A value above 1 is a violation.
double violation_ratio(const Sides& sides);

struct ConditionReport {
  ConditionKind kind = ConditionKind::monotonicity;
  Coefficients coeffs;
  long trials = 0;
  long evaluations = 0;
  bool pass = true;
  double worst_ratio = 0.0;
  /// Worst violating instance, present iff !pass.
  std::optional<ConditionInstance> counterexample;
};

nlohmann::json to_json(const ConditionReport& report);

struct CheckOptions {
  long trials = 10000;
  /// Random zeta/eta splits per trial for VM and TPVM, in addition to the
  /// two pure splits (all zeta, all eta).
  int decomps_per_trial = 8;
  /// Mean range used for VM and TPVM, which are stated on (0, 1)^m.
  double interior_lo = 0.05;
  double interior_hi = 0.95;
};

/// Random action S and mean vectors mu <= mu'; checks r(S; mu) <= r(S; mu') + 1e-12.
ConditionReport check_monotonicity(const Environment& env, const CheckOptions& opt, Rng& rng);
/// |r(S;mu') - r(S;mu)| <= B1 sum_i p_i^{mu,S} |mu_i - mu'_i|.
ConditionReport check_tpm(const Environment& env, double b1, const CheckOptions& opt, Rng& rng);
/// |dr| <= Bv sqrt(sum_{S~} zeta_i^2 / ((1-mu_i) mu_i)) + B1 sum_{S~} |eta_i|.
ConditionReport check_vm(const Environment& env, double bv, double b1, const CheckOptions& opt, Rng& rng);
/// As VM with p_i^lambda inside the root and p_i on the eta term.
ConditionReport check_tpvm(const Environment& env, double bv, double b1, double lambda,
                           const CheckOptions& opt, Rng& rng);
/// |p_i^{mu',S} - p_i^{mu,S}| <= Bp sum_j p_j^{mu,S} |mu_j - mu'_j|.
ConditionReport check_tp_smoothness(const Environment& env, double bp, const CheckOptions& opt, Rng& rng);

ConditionReport check_condition(const Environment& env, ConditionKind kind, const Coefficients& coeffs,
                                const CheckOptions& opt, Rng& rng);

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Mean realized reward over n plays of `action` under `mu`.
McEstimate mc_expected_reward(const Environment& env, const Action& action, std::span<const double> mu,
                              long n, Rng& rng);
/// Per-arm frequency of appearing in the triggered set over n plays.
std::vector<McEstimate> mc_triggering_freq(const Environment& env, const Action& action,
                                           std::span<const double> mu, long n, Rng& rng);

struct ContractLine {
  std::string quantity;  // "reward" or "trigger[<arm>]"
  double analytic = 0.0;
  double estimate = 0.0;
  double std_error = 0.0;
  bool pass = true;
};

struct ContractReport {
  Action action;
  long samples = 0;
  bool pass = true;
  std::vector<ContractLine> lines;
};

/// Compares Monte-Carlo reward and triggering frequencies (one shared set of
/// n plays) with the analytic values at `z` standard errors. Triggering
/// standard errors use the analytic probability, sqrt(p(1-p)/n).
ContractReport contract_check(const Environment& env, const Action& action, std::span<const double> mu,
                              long n, Rng& rng, double z = 4.0);

nlohmann::json to_json(const ContractReport& report);

}  // namespace c2mab
