#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "c2mab/linalg.hpp"
#include "c2mab/model.hpp"

namespace c2mab {

enum class PolicyKind { c2ucbt, vac2ucb, cucb, bcucbt };

std::string to_string(PolicyKind kind);
/// Accepts "c2ucbt", "vac2ucb", "cucb", "bcucbt"; throws on anything else.
PolicyKind parse_policy_kind(const std::string& name);

struct PolicyConfig {
  std::optional<double> gamma;  // default: max(1, K) for C2-UCB-T, 4K for VAC2-UCB
  std::optional<double> delta;  // default: 1 / horizon
  long horizon = 1;
  int batch = 1;  // K
  int dim = 1;    // d
  double exploration_scale = 1.0;

  /// Copy with gamma and delta filled in for `kind`; throws
  /// std::invalid_argument when a resolved value is out of range.
  PolicyConfig resolved(PolicyKind kind) const;
  double gamma_value() const { return gamma.value(); }
  double delta_value() const { return delta.value(); }
};

/// Confidence radius of C2-UCB-T (expects a resolved config):
/// scale * (sqrt(d log((gamma + K T / d) / gamma) + 2 log(1/delta)) + sqrt(gamma)).
double c2ucbt_radius(const PolicyConfig& cfg);

/// Variance-adaptive radius (expects a resolved config):
/// scale * (1 + sqrt(gamma) + 4 sqrt(log(6TN/delta * log(3TN/delta)))) with
/// N = (4 d^2 K^4 T^4)^d handled in the log domain.
double vac2ucb_radius(const PolicyConfig& cfg);

/// max over mu in [lcb, ucb] of mu (1 - mu).
double optimistic_variance(double lcb, double ucb);

/// Floor applied to the optimistic variance so update weights stay finite.
inline constexpr double kVarianceFloor = 1e-6;

struct ArmEstimates {
  std::vector<double> ucb;      // clipped to [0, 1]
  std::vector<double> lcb;      // clipped to [0, 1]
  std::vector<double> opt_var;  // in [kVarianceFloor, 1/4]
  std::vector<double> width;    // ||phi||_{G^-1} for contextual policies, bonus for baselines
};

using Oracle = std::function<Action(std::span<const double>)>;

class Policy {
 public:
  virtual ~Policy() = default;

  virtual PolicyKind kind() const = 0;
  /// Decision for 1-based round `round`; refreshes estimates().
  virtual Action select(long round, const FeatureContext& ctx) = 0;
  /// Consumes the feedback of the action returned by the last select().
  virtual void update(const FeatureContext& ctx, const Feedback& fb) = 0;

  const ArmEstimates& estimates() const { return est_; }

 protected:
  explicit Policy(Oracle oracle) : oracle_(std::move(oracle)) {}
  void check_feedback(const Feedback& fb, int num_arms) const;

  Oracle oracle_;
  ArmEstimates est_;
};

/// Contextual UCB with probabilistically triggered arms: ridge regression on
/// every triggered arm with unit weight.
class C2UcbT final : public Policy {
 public:
  C2UcbT(const PolicyConfig& cfg, Oracle oracle);

  PolicyKind kind() const override { return PolicyKind::c2ucbt; }
  Action select(long round, const FeatureContext& ctx) override;
  void update(const FeatureContext& ctx, const Feedback& fb) override;

  double radius() const { return radius_; }
  const RegressionState& state() const { return state_; }

 private:
  PolicyConfig cfg_;
  double radius_;
  RegressionState state_;
};

/// Variance-adaptive contextual UCB: confidence interval of half-width
/// 2 * radius, optimistic variance per arm, and updates weighted by the
/// inverse optimistic variance frozen at decision time.
class Vac2Ucb final : public Policy {
 public:
  Vac2Ucb(const PolicyConfig& cfg, Oracle oracle);

  PolicyKind kind() const override { return PolicyKind::vac2ucb; }
  Action select(long round, const FeatureContext& ctx) override;
  void update(const FeatureContext& ctx, const Feedback& fb) override;

  double radius() const { return radius_; }
  const RegressionState& state() const { return state_; }

 private:
  PolicyConfig cfg_;
  double radius_;
  RegressionState state_;
};

/// Per-arm counters shared by the non-contextual baselines.
struct CounterState {
  std::vector<long> count;
  std::vector<double> mean;
  std::vector<double> m2;  // sum of squared deviations (Welford)
  long round = 0;

  explicit CounterState(int num_arms);
  void observe(int arm, double x);
  /// Population variance of the observations of `arm`; 0 before any.
  double variance(int arm) const;
};

/// CUCB: mu_hat + sqrt(3 ln t / (2 T_i)); unobserved arms score 1.
class Cucb final : public Policy {
 public:
  Cucb(int num_arms, const PolicyConfig& cfg, Oracle oracle);

  PolicyKind kind() const override { return PolicyKind::cucb; }
  Action select(long round, const FeatureContext& ctx) override;
  void update(const FeatureContext& ctx, const Feedback& fb) override;
  const CounterState& counters() const { return counters_; }

  /// `round` is real so that the formula can be probed at arbitrary t.
  static double bonus(double round, long count);

 private:
  double scale_;
  CounterState counters_;
};

/// BCUCB-T: mu_hat + sqrt(6 V_hat ln t / T_i) + 9 ln t / T_i; unobserved arms score 1.
class BcucbT final : public Policy {
 public:
  BcucbT(int num_arms, const PolicyConfig& cfg, Oracle oracle);

  PolicyKind kind() const override { return PolicyKind::bcucbt; }
  Action select(long round, const FeatureContext& ctx) override;
  void update(const FeatureContext& ctx, const Feedback& fb) override;
  const CounterState& counters() const { return counters_; }

  static double bonus(double round, long count, double variance);

 private:
  double scale_;
  CounterState counters_;
};

std::unique_ptr<Policy> make_policy(PolicyKind kind, const PolicyConfig& cfg, int num_arms,
                                    Oracle oracle);

}  // namespace c2mab
