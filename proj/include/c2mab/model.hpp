#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "c2mab/rng.hpp"

namespace c2mab {

/// Unknown parameter theta*. ||theta*|| <= 1 unless produced by one_hot_lift,
/// which may exceed it and says so through norm_relaxed.
struct LinearGroundTruth {
  Eigen::VectorXd theta_star;
  bool norm_relaxed = false;

  int dim() const { return static_cast<int>(theta_star.size()); }
  void validate() const;
};

/// One round's features; row i is phi_t(i).
struct FeatureContext {
  Eigen::MatrixXd features;

  int num_arms() const { return static_cast<int>(features.rows()); }
  int dim() const { return static_cast<int>(features.cols()); }
  Eigen::VectorXd row(int arm) const { return features.row(arm).transpose(); }
  /// Throws if any row has norm above 1 + 1e-12 or a non-finite entry.
  void validate() const;
};

enum class ActionKind { ordered_list, seed_set };

/// A super arm: an ordered slate for cascades, a seed set for PMC/OIM.
struct Action {
  std::vector<int> arms;
  ActionKind kind = ActionKind::ordered_list;

  bool operator==(const Action&) const = default;
  /// Arms joined by '-', as used in trace files.
  std::string to_string() const;
};

struct Feedback {
  std::vector<int> triggered;          // tau_t, in observation order
  std::vector<unsigned char> outcomes;  // outcomes[j] belongs to triggered[j]
  double realized_reward = 0.0;
};

enum class OracleKind { top_k, greedy_coverage, greedy_im, brute_force };

struct OracleSpec {
  OracleKind kind = OracleKind::top_k;
  double alpha = 1.0;
  double beta = 1.0;
};

std::string to_string(OracleKind kind);

/// The C2MAB-T environment contract. Outcomes are independent Bernoulli
/// draws with the round's mean vector; each implementation supplies the
/// triggering process and the analytic r(S; mu) and p_i^{mu,S}.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string kind() const = 0;
  virtual int num_arms() const = 0;
  virtual int dim() const = 0;
  /// Largest number of arms a single action can trigger.
  virtual int batch_size() const = 0;

  virtual FeatureContext context(long round, Rng& rng) const = 0;
  /// Mean vector mu_t for the context returned at `round`.
  virtual std::vector<double> means(const FeatureContext& ctx) const = 0;

  /// Draws X_t ~ Bernoulli(mu) and applies the triggering process.
  virtual Feedback play(const Action& action, std::span<const double> mu, Rng& rng) const = 0;

  virtual double expected_reward(const Action& action, std::span<const double> mu) const = 0;
  /// Implementations override at least one of triggering_prob and
  /// triggering_probs; each default is written in terms of the other.
  virtual double triggering_prob(int arm, const Action& action, std::span<const double> mu) const;
  /// All p_i^{mu,S} at once; the default loops over triggering_prob.
  virtual std::vector<double> triggering_probs(const Action& action,
                                               std::span<const double> mu) const;
  /// S-tilde: arms that can be triggered by the action under some mean vector.
  virtual std::vector<int> triggerable(const Action& action) const = 0;

  /// Feasible actions are the `action_size()`-subsets of [0, action_pool())
  /// (items for cascades, source nodes for PMC, graph nodes for OIM).
  /// For ordered slates the reward ignores order, so subsets enumerate
  /// every distinct reward value.
  virtual int action_pool() const = 0;
  virtual int action_size() const = 0;
  virtual ActionKind action_kind() const = 0;

  /// Uniformly random feasible action.
  virtual Action random_action(Rng& rng) const = 0;
  /// The environment's sanctioned offline oracle.
  virtual Action oracle(std::span<const double> scores) const = 0;
  virtual OracleSpec oracle_spec() const = 0;
  /// Throws std::invalid_argument when the action is not feasible.
  virtual void validate_action(const Action& action) const = 0;

  /// False when expected_reward/triggering_prob are Monte-Carlo estimates.
  virtual bool analytic_exact() const { return true; }
};

/// mu_i = <theta*, phi(i)>. Values outside [-1e-9, 1 + 1e-9] are a
/// construction error (std::domain_error); the rest are clamped to [0, 1].
std::vector<double> arm_means(const LinearGroundTruth& truth, const FeatureContext& ctx);

/// Non-contextual reduction: theta* = mu and phi(i) = e_i.
std::pair<LinearGroundTruth, FeatureContext> one_hot_lift(std::span<const double> mu);

}  // namespace c2mab
