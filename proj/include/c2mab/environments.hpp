#pragma once

#include <map>
#include <memory>
#include <vector>

#include "c2mab/graphs.hpp"
#include "c2mab/model.hpp"

namespace c2mab {

/// Environment with a fixed ground truth theta* and a feature context that
/// does not change across rounds.
class LinearEnvironment : public Environment {
 public:
  LinearEnvironment(LinearGroundTruth truth, FeatureContext features);

  int num_arms() const override { return features_.num_arms(); }
  int dim() const override { return features_.dim(); }
  FeatureContext context(long round, Rng& rng) const override;
  std::vector<double> means(const FeatureContext& ctx) const override;

  const LinearGroundTruth& truth() const { return truth_; }
  const FeatureContext& features() const { return features_; }
  /// Means under the fixed context.
  const std::vector<double>& base_means() const { return base_means_; }

 protected:
  LinearGroundTruth truth_;
  FeatureContext features_;
  std::vector<double> base_means_;
};

enum class CascadeForm { disjunctive, conjunctive };

// Cascade reward and triggering in slate order. `slate` holds arm ids.
double cascade_expected_reward(CascadeForm form, std::span<const int> slate,
                               std::span<const double> mu);
/// Probability that the arm at `position` (0-based) of the slate is observed.
double cascade_position_prob(CascadeForm form, std::span<const int> slate, int position,
                             std::span<const double> mu);

/// Ordered-slate cascading bandit. Disjunctive: the user scans until the
/// first 1 and the reward is 1 if any observed outcome is 1. Conjunctive:
/// the scan stops at the first 0 and the reward is 1 only if all K are 1.
class CascadeEnv : public LinearEnvironment {
 public:
  CascadeEnv(CascadeForm form, int slate_size, LinearGroundTruth truth, FeatureContext features);

  std::string kind() const override;
  int batch_size() const override { return slate_size_; }
  Feedback play(const Action& action, std::span<const double> mu, Rng& rng) const override;
  double expected_reward(const Action& action, std::span<const double> mu) const override;
  std::vector<double> triggering_probs(const Action& action,
                                       std::span<const double> mu) const override;
  std::vector<int> triggerable(const Action& action) const override { return action.arms; }
  int action_pool() const override { return num_arms(); }
  int action_size() const override { return slate_size_; }
  ActionKind action_kind() const override { return ActionKind::ordered_list; }
  Action random_action(Rng& rng) const override;
  Action oracle(std::span<const double> scores) const override;
  OracleSpec oracle_spec() const override { return {OracleKind::top_k, 1.0, 1.0}; }
  void validate_action(const Action& action) const override;

  CascadeForm form() const { return form_; }
  int slate_size() const { return slate_size_; }

 private:
  CascadeForm form_;
  int slate_size_;
};

/// Probabilistic maximum coverage. Arms are edges of a bipartite graph; an
/// action is a set of k sources and triggers every incident edge.
class PmcEnv : public LinearEnvironment {
 public:
  PmcEnv(BipartiteGraph graph, int budget, LinearGroundTruth truth, FeatureContext features);

  std::string kind() const override { return "pmc"; }
  int batch_size() const override { return batch_size_; }
  Feedback play(const Action& action, std::span<const double> mu, Rng& rng) const override;
  double expected_reward(const Action& action, std::span<const double> mu) const override;
  std::vector<double> triggering_probs(const Action& action,
                                       std::span<const double> mu) const override;
  std::vector<int> triggerable(const Action& action) const override;
  int action_pool() const override { return graph_.num_sources; }
  int action_size() const override { return budget_; }
  ActionKind action_kind() const override { return ActionKind::seed_set; }
  Action random_action(Rng& rng) const override;
  Action oracle(std::span<const double> scores) const override;
  OracleSpec oracle_spec() const override;
  void validate_action(const Action& action) const override;

  const BipartiteGraph& graph() const { return graph_; }
  int budget() const { return budget_; }

 private:
  BipartiteGraph graph_;
  int budget_;
  int batch_size_ = 0;
};

/// Online influence maximization under independent cascade. Arms are edges;
/// an action is a set of k seed nodes; the triggered edges are those leaving
/// nodes reached in the live-edge graph.
///
/// expected_reward and triggering probabilities are exact (live-edge
/// enumeration) when at most kExactEdgeLimit edges are reachable from the
/// seeds, otherwise Monte-Carlo estimates over `mc_samples` worlds drawn from
/// a fixed seed. Results for the most recent mean vector are memoized per
/// seed set, so one instance must not be shared between threads.
class OimEnv : public LinearEnvironment {
 public:
  OimEnv(DirectedGraph graph, int budget, LinearGroundTruth truth, FeatureContext features,
         int mc_samples = 2000);

  std::string kind() const override { return "oim"; }
  int batch_size() const override { return graph_.num_edges(); }
  Feedback play(const Action& action, std::span<const double> mu, Rng& rng) const override;
  double expected_reward(const Action& action, std::span<const double> mu) const override;
  std::vector<double> triggering_probs(const Action& action,
                                       std::span<const double> mu) const override;
  std::vector<int> triggerable(const Action& action) const override;
  int action_pool() const override { return graph_.num_nodes; }
  int action_size() const override { return budget_; }
  ActionKind action_kind() const override { return ActionKind::seed_set; }
  Action random_action(Rng& rng) const override;
  Action oracle(std::span<const double> scores) const override;
  OracleSpec oracle_spec() const override;
  void validate_action(const Action& action) const override;
  bool analytic_exact() const override { return graph_.num_edges() <= kExactEdgeLimit; }

  const DirectedGraph& graph() const { return graph_; }
  int budget() const { return budget_; }
  int mc_samples() const { return mc_samples_; }

 private:
  const CascadeStats& stats(const Action& action, std::span<const double> mu) const;

  DirectedGraph graph_;
  int budget_;
  int mc_samples_;
  mutable std::vector<double> memo_mu_;
  mutable std::map<std::vector<int>, CascadeStats> memo_;
};

/// Disjunctive cascade driven by a binary rating matrix: each round a user
/// is drawn uniformly and X_{t,i} is that user's rating bit for item i.
/// Analytic quantities use the empirical per-item click rates as mu.
class RatingMatrixCascadeEnv : public Environment {
 public:
  /// ratings[i][u] is the bit for item i and user u.
  RatingMatrixCascadeEnv(FeatureContext features, std::vector<std::vector<unsigned char>> ratings,
                         int slate_size);

  std::string kind() const override { return "rating-matrix"; }
  int num_arms() const override { return features_.num_arms(); }
  int dim() const override { return features_.dim(); }
  int batch_size() const override { return slate_size_; }
  FeatureContext context(long round, Rng& rng) const override;
  std::vector<double> means(const FeatureContext&) const override { return click_rates_; }
  Feedback play(const Action& action, std::span<const double> mu, Rng& rng) const override;
  double expected_reward(const Action& action, std::span<const double> mu) const override;
  std::vector<double> triggering_probs(const Action& action,
                                       std::span<const double> mu) const override;
  std::vector<int> triggerable(const Action& action) const override { return action.arms; }
  int action_pool() const override { return num_arms(); }
  int action_size() const override { return slate_size_; }
  ActionKind action_kind() const override { return ActionKind::ordered_list; }
  Action random_action(Rng& rng) const override;
  Action oracle(std::span<const double> scores) const override;
  OracleSpec oracle_spec() const override { return {OracleKind::top_k, 1.0, 1.0}; }
  void validate_action(const Action& action) const override;

  int num_users() const { return num_users_; }
  const std::vector<double>& click_rates() const { return click_rates_; }
  const FeatureContext& features() const { return features_; }
  bool rating(int item, int user) const {
    return by_user_[static_cast<std::size_t>(user) * static_cast<std::size_t>(num_arms()) +
                    static_cast<std::size_t>(item)] != 0;
  }

 private:
  FeatureContext features_;
  int slate_size_;
  int num_users_ = 0;
  std::vector<unsigned char> by_user_;  // user-major
  std::vector<double> click_rates_;
};

struct SyntheticCascade {
  std::unique_ptr<CascadeEnv> env;
  std::vector<double> mu;
};

/// Disjunctive linear cascade instance: mu_i ~ U[2/(3K), 1/K] for the first
/// K items and U[0, 1/(3K)] for the rest; theta* = e_1 and
/// phi(i) = (mu_i, sqrt(1 - mu_i^2) u_i) with u_i uniform on the unit sphere
/// of R^{d-1}. Requires d >= 2 and 1 <= K <= m.
SyntheticCascade gen_synthetic_cascade(int m, int slate_size, int d, Rng& rng);

}  // namespace c2mab
