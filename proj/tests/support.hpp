#pragma once

// Helpers shared by the unit tests and the acceptance binary.

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <utility>
#include <vector>

#include "c2mab/environments.hpp"
#include "c2mab/graphs.hpp"
#include "c2mab/model.hpp"
#include "c2mab/rng.hpp"

namespace testing {

struct WeightedSample {
  Eigen::VectorXd phi;
  double outcome;
  double weight;
};

/// Minimizes gamma ||theta||^2 + sum_s w_s (x_s - <theta, phi_s>)^2 by
/// steepest descent with exact line search, using only the raw samples.
inline Eigen::VectorXd ridge_by_gradient_descent(const std::vector<WeightedSample>& data, int dim, double gamma,
                                                 int max_iter = 2'000'000, double tol = 1e-13) {
  // Hessian-vector product of half the objective, formed from the samples.
  auto hess = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd out = gamma * v;
    for (const auto& s : data) out += s.weight * s.phi.dot(v) * s.phi;
    return out;
  };
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(dim);
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd grad = gamma * theta;
    for (const auto& s : data) grad -= s.weight * (s.outcome - s.phi.dot(theta)) * s.phi;
    if (grad.norm() < tol) break;
    const double step = grad.squaredNorm() / grad.dot(hess(grad));
    theta -= step * grad;
  }
  return theta;
}

/// Random weighted regression instance with ||phi|| <= 1.
inline std::vector<WeightedSample> random_samples(int dim, int n, double w_lo, double w_hi, c2mab::Rng& rng) {
  std::vector<WeightedSample> out;
  for (int s = 0; s < n; ++s) {
    const auto u = rng.unit_vector(static_cast<std::size_t>(dim));
    Eigen::VectorXd phi = Eigen::Map<const Eigen::VectorXd>(u.data(), dim) * rng.uniform();
    out.push_back({phi, rng.bernoulli(0.5) ? 1.0 : 0.0, rng.uniform(w_lo, w_hi)});
  }
  return out;
}

/// Test-only wrapper that changes the feature context every round: at round
/// t arm i receives base feature row (i + t) mod m, so means move with the
/// features while theta* stays fixed.
class RotatingContextEnv final : public c2mab::Environment {
 public:
  explicit RotatingContextEnv(std::unique_ptr<c2mab::CascadeEnv> inner) : inner_(std::move(inner)) {}

  std::string kind() const override { return "rotating-" + inner_->kind(); }
  int num_arms() const override { return inner_->num_arms(); }
  int dim() const override { return inner_->dim(); }
  int batch_size() const override { return inner_->batch_size(); }
  c2mab::FeatureContext context(long round, c2mab::Rng&) const override {
    const int m = num_arms();
    c2mab::FeatureContext ctx{Eigen::MatrixXd(m, dim())};
    for (int i = 0; i < m; ++i) ctx.features.row(i) = inner_->features().features.row(static_cast<int>((i + round) % m));
    return ctx;
  }
  std::vector<double> means(const c2mab::FeatureContext& ctx) const override {
    return c2mab::arm_means(inner_->truth(), ctx);
  }
  c2mab::Feedback play(const c2mab::Action& a, std::span<const double> mu, c2mab::Rng& rng) const override {
    return inner_->play(a, mu, rng);
  }
  double expected_reward(const c2mab::Action& a, std::span<const double> mu) const override {
    return inner_->expected_reward(a, mu);
  }
  std::vector<double> triggering_probs(const c2mab::Action& a, std::span<const double> mu) const override {
    return inner_->triggering_probs(a, mu);
  }
  std::vector<int> triggerable(const c2mab::Action& a) const override { return inner_->triggerable(a); }
  int action_pool() const override { return inner_->action_pool(); }
  int action_size() const override { return inner_->action_size(); }
  c2mab::ActionKind action_kind() const override { return inner_->action_kind(); }
  c2mab::Action random_action(c2mab::Rng& rng) const override { return inner_->random_action(rng); }
  c2mab::Action oracle(std::span<const double> s) const override { return inner_->oracle(s); }
  c2mab::OracleSpec oracle_spec() const override { return inner_->oracle_spec(); }
  void validate_action(const c2mab::Action& a) const override { inner_->validate_action(a); }

 private:
  std::unique_ptr<c2mab::CascadeEnv> inner_;
};

inline std::unique_ptr<c2mab::CascadeEnv> lifted_cascade(c2mab::CascadeForm form, int k, const std::vector<double>& mu) {
  auto [truth, ctx] = c2mab::one_hot_lift(mu);
  return std::make_unique<c2mab::CascadeEnv>(form, k, std::move(truth), std::move(ctx));
}

inline c2mab::BipartiteGraph random_bipartite(int L, int V, double density, c2mab::Rng& rng) {
  c2mab::BipartiteGraph g;
  g.num_sources = L;
  g.num_targets = V;
  for (int u = 0; u < L; ++u) {
    for (int v = 0; v < V; ++v) {
      if (rng.bernoulli(density)) g.edges.emplace_back(u, v);
    }
  }
  // Every source gets at least one edge so that no action is degenerate.
  for (int u = 0; u < L; ++u) {
    bool has = false;
    for (const auto& e : g.edges) has = has || e.first == u;
    if (!has) g.edges.emplace_back(u, static_cast<int>(rng.below(static_cast<std::uint64_t>(V))));
  }
  g.finalize();
  return g;
}

inline c2mab::DirectedGraph random_digraph(int n, int max_edges, c2mab::Rng& rng) {
  c2mab::DirectedGraph g;
  g.num_nodes = n;
  std::vector<std::pair<int, int>> all;
  for (int u = 0; u < n; ++u) {
    for (int v = 0; v < n; ++v) {
      if (u != v) all.emplace_back(u, v);
    }
  }
  const int e = std::min<int>(max_edges, static_cast<int>(all.size()));
  for (int idx : rng.sample_distinct(static_cast<int>(all.size()), e)) g.edges.push_back(all[static_cast<std::size_t>(idx)]);
  g.finalize();
  return g;
}

/// Random DAG: edges only go from lower to higher node ids.
inline c2mab::DirectedGraph random_dag(int n, double density, c2mab::Rng& rng) {
  c2mab::DirectedGraph g;
  g.num_nodes = n;
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      if (rng.bernoulli(density)) g.edges.emplace_back(u, v);
    }
  }
  g.finalize();
  return g;
}

inline std::vector<double> random_means(int m, c2mab::Rng& rng) {
  std::vector<double> mu(static_cast<std::size_t>(m));
  for (auto& x : mu) x = rng.uniform();
  return mu;
}

}  // namespace testing
