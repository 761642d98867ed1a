#include "c2mab/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace c2mab {

void LinearGroundTruth::validate() const {
  if (!theta_star.allFinite()) throw std::invalid_argument("theta* has non-finite entries");
  if (!norm_relaxed && theta_star.norm() > 1.0 + 1e-12) {
    throw std::invalid_argument("||theta*|| exceeds 1");
  }
}

void FeatureContext::validate() const {
  if (!features.allFinite()) throw std::invalid_argument("features have non-finite entries");
  for (int i = 0; i < num_arms(); ++i) {
    if (features.row(i).norm() > 1.0 + 1e-12) {
      throw std::invalid_argument("feature row " + std::to_string(i) + " has norm above 1");
    }
  }
}

std::string Action::to_string() const {
  std::string out;
  for (std::size_t j = 0; j < arms.size(); ++j) {
    if (j) out += '-';
    out += std::to_string(arms[j]);
  }
  return out;
}

std::string to_string(OracleKind kind) {
  switch (kind) {
    case OracleKind::top_k: return "top-k";
    case OracleKind::greedy_coverage: return "greedy-coverage";
    case OracleKind::greedy_im: return "greedy-im";
    case OracleKind::brute_force: return "brute-force";
  }
  return "unknown";
}

double Environment::triggering_prob(int arm, const Action& action,
                                    std::span<const double> mu) const {
  return triggering_probs(action, mu).at(static_cast<std::size_t>(arm));
}

std::vector<double> Environment::triggering_probs(const Action& action,
                                                  std::span<const double> mu) const {
  std::vector<double> p(static_cast<std::size_t>(num_arms()));
  for (int i = 0; i < num_arms(); ++i) p[static_cast<std::size_t>(i)] = triggering_prob(i, action, mu);
  return p;
}

std::vector<double> arm_means(const LinearGroundTruth& truth, const FeatureContext& ctx) {
  if (truth.dim() != ctx.dim()) throw std::invalid_argument("theta*/feature dimension mismatch");
  const Eigen::VectorXd raw = ctx.features * truth.theta_star;
  std::vector<double> mu(static_cast<std::size_t>(raw.size()));
  for (Eigen::Index i = 0; i < raw.size(); ++i) {
    const double v = raw[i];
    if (!(v >= -1e-9 && v <= 1.0 + 1e-9)) {
      throw std::domain_error("arm " + std::to_string(i) + " mean " + std::to_string(v) +
                              " lies outside [0, 1]");
    }
    mu[static_cast<std::size_t>(i)] = std::clamp(v, 0.0, 1.0);
  }
  return mu;
}

std::pair<LinearGroundTruth, FeatureContext> one_hot_lift(std::span<const double> mu) {
  const auto m = static_cast<Eigen::Index>(mu.size());
  LinearGroundTruth truth;
  truth.theta_star = Eigen::Map<const Eigen::VectorXd>(mu.data(), m);
  truth.norm_relaxed = truth.theta_star.norm() > 1.0 + 1e-12;
  FeatureContext ctx{Eigen::MatrixXd::Identity(m, m)};
  return {std::move(truth), std::move(ctx)};
}

}  // namespace c2mab
