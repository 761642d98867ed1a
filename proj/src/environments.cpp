#include "c2mab/environments.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

#include "c2mab/oracles.hpp"

namespace c2mab {

namespace {

void check_distinct_in_range(const Action& action, int pool, int size, const char* what) {
  if (static_cast<int>(action.arms.size()) != size) {
    throw std::invalid_argument(std::string(what) + " must have exactly " + std::to_string(size) +
                                " entries, got " + std::to_string(action.arms.size()));
  }
  std::vector<unsigned char> seen(static_cast<std::size_t>(pool), 0);
  for (int a : action.arms) {
    if (a < 0 || a >= pool) throw std::invalid_argument(std::string(what) + " entry out of range");
    if (seen[static_cast<std::size_t>(a)]++) {
      throw std::invalid_argument(std::string(what) + " has duplicate entry " + std::to_string(a));
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------

LinearEnvironment::LinearEnvironment(LinearGroundTruth truth, FeatureContext features)
    : truth_(std::move(truth)), features_(std::move(features)) {
  truth_.validate();
  features_.validate();
  base_means_ = arm_means(truth_, features_);
}

FeatureContext LinearEnvironment::context(long, Rng&) const { return features_; }

std::vector<double> LinearEnvironment::means(const FeatureContext& ctx) const {
  return arm_means(truth_, ctx);
}

// ---------------------------------------------------------------------------

double cascade_expected_reward(CascadeForm form, std::span<const int> slate,
                               std::span<const double> mu) {
  double prod = 1.0;
  for (int a : slate) {
    const double m = mu[static_cast<std::size_t>(a)];
    prod *= form == CascadeForm::disjunctive ? 1.0 - m : m;
  }
  return form == CascadeForm::disjunctive ? 1.0 - prod : prod;
}

double cascade_position_prob(CascadeForm form, std::span<const int> slate, int position,
                             std::span<const double> mu) {
  double p = 1.0;
  for (int j = 0; j < position; ++j) {
    const double m = mu[static_cast<std::size_t>(slate[static_cast<std::size_t>(j)])];
    p *= form == CascadeForm::disjunctive ? 1.0 - m : m;
  }
  return p;
}

CascadeEnv::CascadeEnv(CascadeForm form, int slate_size, LinearGroundTruth truth,
                       FeatureContext features)
    : LinearEnvironment(std::move(truth), std::move(features)), form_(form), slate_size_(slate_size) {
  if (slate_size < 1 || slate_size > num_arms()) {
    throw std::invalid_argument("cascade slate size must lie in [1, m]");
  }
}

std::string CascadeEnv::kind() const {
  return form_ == CascadeForm::disjunctive ? "disjunctive-cascade" : "conjunctive-cascade";
}

void CascadeEnv::validate_action(const Action& action) const {
  check_distinct_in_range(action, num_arms(), slate_size_, "cascade slate");
}

Feedback CascadeEnv::play(const Action& action, std::span<const double> mu, Rng& rng) const {
  validate_action(action);
  // Disjunctive scans stop at the first 1, conjunctive ones at the first 0.
  const unsigned char stop = form_ == CascadeForm::disjunctive ? 1 : 0;
  Feedback fb;
  bool stopped = false;
  for (int a : action.arms) {
    const unsigned char x = rng.bernoulli(mu[static_cast<std::size_t>(a)]) ? 1 : 0;
    fb.triggered.push_back(a);
    fb.outcomes.push_back(x);
    if (x == stop) {
      stopped = true;
      break;
    }
  }
  fb.realized_reward = form_ == CascadeForm::disjunctive ? (stopped ? 1.0 : 0.0)
                                                         : (stopped ? 0.0 : 1.0);
  return fb;
}

double CascadeEnv::expected_reward(const Action& action, std::span<const double> mu) const {
  return cascade_expected_reward(form_, action.arms, mu);
}

std::vector<double> CascadeEnv::triggering_probs(const Action& action,
                                                 std::span<const double> mu) const {
  std::vector<double> p(static_cast<std::size_t>(num_arms()), 0.0);
  double running = 1.0;
  for (int a : action.arms) {
    p[static_cast<std::size_t>(a)] = running;
    const double m = mu[static_cast<std::size_t>(a)];
    running *= form_ == CascadeForm::disjunctive ? 1.0 - m : m;
  }
  return p;
}

Action CascadeEnv::random_action(Rng& rng) const {
  return Action{rng.sample_distinct(num_arms(), slate_size_), ActionKind::ordered_list};
}

Action CascadeEnv::oracle(std::span<const double> scores) const { return top_k(scores, slate_size_); }

// ---------------------------------------------------------------------------

PmcEnv::PmcEnv(BipartiteGraph graph, int budget, LinearGroundTruth truth, FeatureContext features)
    : LinearEnvironment(std::move(truth), std::move(features)), graph_(std::move(graph)), budget_(budget) {
  graph_.finalize();
  if (graph_.num_edges() != num_arms()) {
    throw std::invalid_argument("PMC needs one feature row per edge");
  }
  if (budget < 1 || budget > graph_.num_sources) throw std::invalid_argument("PMC budget must lie in [1, |L|]");
  std::vector<int> degree;
  for (int u = 0; u < graph_.num_sources; ++u) degree.push_back(static_cast<int>(graph_.incident(u).size()));
  std::sort(degree.begin(), degree.end(), std::greater<>());
  for (int j = 0; j < budget; ++j) batch_size_ += degree[static_cast<std::size_t>(j)];
}

void PmcEnv::validate_action(const Action& action) const {
  check_distinct_in_range(action, graph_.num_sources, budget_, "PMC seed set");
}

Feedback PmcEnv::play(const Action& action, std::span<const double> mu, Rng& rng) const {
  validate_action(action);
  Feedback fb;
  std::vector<unsigned char> covered(static_cast<std::size_t>(graph_.num_targets), 0);
  for (int u : action.arms) {
    for (int e : graph_.incident(u)) {
      const unsigned char x = rng.bernoulli(mu[static_cast<std::size_t>(e)]) ? 1 : 0;
      fb.triggered.push_back(e);
      fb.outcomes.push_back(x);
      if (x) covered[static_cast<std::size_t>(graph_.edges[static_cast<std::size_t>(e)].second)] = 1;
    }
  }
  fb.realized_reward = static_cast<double>(std::count(covered.begin(), covered.end(), 1));
  return fb;
}

double PmcEnv::expected_reward(const Action& action, std::span<const double> mu) const {
  return coverage_value(graph_, action.arms, mu);
}

std::vector<double> PmcEnv::triggering_probs(const Action& action, std::span<const double>) const {
  std::vector<double> p(static_cast<std::size_t>(num_arms()), 0.0);
  for (int e : triggerable(action)) p[static_cast<std::size_t>(e)] = 1.0;
  return p;
}

std::vector<int> PmcEnv::triggerable(const Action& action) const {
  std::vector<int> edges;
  for (int u : action.arms) {
    const auto& inc = graph_.incident(u);
    edges.insert(edges.end(), inc.begin(), inc.end());
  }
  return edges;
}

Action PmcEnv::random_action(Rng& rng) const {
  return Action{rng.sample_distinct(graph_.num_sources, budget_), ActionKind::seed_set};
}

Action PmcEnv::oracle(std::span<const double> scores) const {
  return greedy_coverage(scores, graph_, budget_);
}

OracleSpec PmcEnv::oracle_spec() const {
  return {OracleKind::greedy_coverage, 1.0 - 1.0 / std::exp(1.0), 1.0};
}

// ---------------------------------------------------------------------------

OimEnv::OimEnv(DirectedGraph graph, int budget, LinearGroundTruth truth, FeatureContext features,
               int mc_samples)
    : LinearEnvironment(std::move(truth), std::move(features)),
      graph_(std::move(graph)),
      budget_(budget),
      mc_samples_(mc_samples) {
  graph_.finalize();
  if (graph_.num_edges() != num_arms()) throw std::invalid_argument("OIM needs one feature row per edge");
  if (budget < 1 || budget > graph_.num_nodes) throw std::invalid_argument("OIM budget must lie in [1, |V|]");
  if (mc_samples < 1) throw std::invalid_argument("OIM mc_samples must be >= 1");
}

void OimEnv::validate_action(const Action& action) const {
  check_distinct_in_range(action, graph_.num_nodes, budget_, "OIM seed set");
}

Feedback OimEnv::play(const Action& action, std::span<const double> mu, Rng& rng) const {
  validate_action(action);
  std::vector<unsigned char> live(static_cast<std::size_t>(graph_.num_edges()));
  for (std::size_t e = 0; e < live.size(); ++e) live[e] = rng.bernoulli(mu[e]) ? 1 : 0;
  const auto reached = reachable_nodes(graph_, action.arms, live);
  Feedback fb;
  for (int e = 0; e < graph_.num_edges(); ++e) {
    if (reached[static_cast<std::size_t>(graph_.edges[static_cast<std::size_t>(e)].first)]) {
      fb.triggered.push_back(e);
      fb.outcomes.push_back(live[static_cast<std::size_t>(e)]);
    }
  }
  fb.realized_reward = static_cast<double>(std::count(reached.begin(), reached.end(), 1));
  return fb;
}

const CascadeStats& OimEnv::stats(const Action& action, std::span<const double> mu) const {
  if (!std::equal(mu.begin(), mu.end(), memo_mu_.begin(), memo_mu_.end())) {
    memo_.clear();
    memo_mu_.assign(mu.begin(), mu.end());
  }
  std::vector<int> key = action.arms;
  std::sort(key.begin(), key.end());
  if (auto it = memo_.find(key); it != memo_.end()) return it->second;

  const auto full = reachable_nodes(graph_, key);
  int relevant = 0;
  for (const auto& [u, v] : graph_.edges) relevant += full[static_cast<std::size_t>(u)];
  CascadeStats s;
  if (relevant <= kExactEdgeLimit) {
    s = exact_cascade_stats(graph_, key, mu);
  } else {
    Rng rng(mix64(0x0111'5EED));
    std::vector<std::vector<unsigned char>> worlds(
        static_cast<std::size_t>(mc_samples_),
        std::vector<unsigned char>(static_cast<std::size_t>(graph_.num_edges())));
    for (auto& w : worlds) {
      for (std::size_t e = 0; e < w.size(); ++e) w[e] = rng.bernoulli(mu[e]) ? 1 : 0;
    }
    s = sampled_cascade_stats(graph_, key, worlds);
  }
  return memo_.emplace(std::move(key), std::move(s)).first->second;
}

double OimEnv::expected_reward(const Action& action, std::span<const double> mu) const {
  return stats(action, mu).spread;
}

std::vector<double> OimEnv::triggering_probs(const Action& action, std::span<const double> mu) const {
  return stats(action, mu).edge_trigger;
}

std::vector<int> OimEnv::triggerable(const Action& action) const {
  const auto full = reachable_nodes(graph_, action.arms);
  std::vector<int> edges;
  for (int e = 0; e < graph_.num_edges(); ++e) {
    if (full[static_cast<std::size_t>(graph_.edges[static_cast<std::size_t>(e)].first)]) edges.push_back(e);
  }
  return edges;
}

Action OimEnv::random_action(Rng& rng) const {
  return Action{rng.sample_distinct(graph_.num_nodes, budget_), ActionKind::seed_set};
}

Action OimEnv::oracle(std::span<const double> scores) const {
  return greedy_im(scores, graph_, budget_, mc_samples_, mix64(0x0A11'0C1E));
}

OracleSpec OimEnv::oracle_spec() const {
  return {OracleKind::greedy_im, 1.0 - 1.0 / std::exp(1.0), 1.0 / graph_.num_nodes};
}

// ---------------------------------------------------------------------------

RatingMatrixCascadeEnv::RatingMatrixCascadeEnv(FeatureContext features,
                                               std::vector<std::vector<unsigned char>> ratings,
                                               int slate_size)
    : features_(std::move(features)), slate_size_(slate_size) {
  features_.validate();
  const int m = features_.num_arms();
  if (static_cast<int>(ratings.size()) != m) throw std::invalid_argument("rating rows must match item count");
  if (m == 0 || ratings.front().empty()) throw std::invalid_argument("empty rating matrix");
  if (slate_size < 1 || slate_size > m) throw std::invalid_argument("slate size must lie in [1, m]");
  num_users_ = static_cast<int>(ratings.front().size());
  by_user_.assign(static_cast<std::size_t>(num_users_) * static_cast<std::size_t>(m), 0);
  click_rates_.assign(static_cast<std::size_t>(m), 0.0);
  for (int i = 0; i < m; ++i) {
    const auto& row = ratings[static_cast<std::size_t>(i)];
    if (static_cast<int>(row.size()) != num_users_) throw std::invalid_argument("ragged rating matrix");
    int ones = 0;
    for (int u = 0; u < num_users_; ++u) {
      const unsigned char bit = row[static_cast<std::size_t>(u)] ? 1 : 0;
      by_user_[static_cast<std::size_t>(u) * static_cast<std::size_t>(m) + static_cast<std::size_t>(i)] = bit;
      ones += bit;
    }
    click_rates_[static_cast<std::size_t>(i)] = static_cast<double>(ones) / num_users_;
  }
}

FeatureContext RatingMatrixCascadeEnv::context(long, Rng&) const { return features_; }

void RatingMatrixCascadeEnv::validate_action(const Action& action) const {
  check_distinct_in_range(action, num_arms(), slate_size_, "cascade slate");
}

Feedback RatingMatrixCascadeEnv::play(const Action& action, std::span<const double>, Rng& rng) const {
  validate_action(action);
  const int user = static_cast<int>(rng.below(static_cast<std::uint64_t>(num_users_)));
  Feedback fb;
  for (int a : action.arms) {
    const unsigned char x = rating(a, user) ? 1 : 0;
    fb.triggered.push_back(a);
    fb.outcomes.push_back(x);
    if (x) {
      fb.realized_reward = 1.0;
      break;
    }
  }
  return fb;
}

double RatingMatrixCascadeEnv::expected_reward(const Action& action, std::span<const double> mu) const {
  return cascade_expected_reward(CascadeForm::disjunctive, action.arms, mu);
}

std::vector<double> RatingMatrixCascadeEnv::triggering_probs(const Action& action,
                                                             std::span<const double> mu) const {
  std::vector<double> p(static_cast<std::size_t>(num_arms()), 0.0);
  for (int j = 0; j < static_cast<int>(action.arms.size()); ++j) {
    p[static_cast<std::size_t>(action.arms[static_cast<std::size_t>(j)])] =
        cascade_position_prob(CascadeForm::disjunctive, action.arms, j, mu);
  }
  return p;
}

Action RatingMatrixCascadeEnv::random_action(Rng& rng) const {
  return Action{rng.sample_distinct(num_arms(), slate_size_), ActionKind::ordered_list};
}

Action RatingMatrixCascadeEnv::oracle(std::span<const double> scores) const {
  return top_k(scores, slate_size_);
}

// ---------------------------------------------------------------------------

SyntheticCascade gen_synthetic_cascade(int m, int slate_size, int d, Rng& rng) {
  if (d < 2) throw std::invalid_argument("synthetic cascade needs d >= 2");
  if (slate_size < 1 || slate_size > m) throw std::invalid_argument("synthetic cascade needs 1 <= K <= m");
  const double k = slate_size;
  std::vector<double> mu(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    mu[static_cast<std::size_t>(i)] =
        i < slate_size ? rng.uniform(2.0 / (3.0 * k), 1.0 / k) : rng.uniform(0.0, 1.0 / (3.0 * k));
  }
  LinearGroundTruth truth{Eigen::VectorXd::Unit(d, 0)};
  FeatureContext ctx{Eigen::MatrixXd::Zero(m, d)};
  for (int i = 0; i < m; ++i) {
    const double mi = mu[static_cast<std::size_t>(i)];
    const auto u = rng.unit_vector(static_cast<std::size_t>(d - 1));
    const double scale = std::sqrt(1.0 - mi * mi);
    ctx.features(i, 0) = mi;
    for (int j = 1; j < d; ++j) ctx.features(i, j) = scale * u[static_cast<std::size_t>(j - 1)];
  }
  SyntheticCascade out;
  out.env = std::make_unique<CascadeEnv>(CascadeForm::disjunctive, slate_size, std::move(truth),
                                         std::move(ctx));
  out.mu = std::move(mu);
  return out;
}

}  // namespace c2mab
