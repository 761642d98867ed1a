#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numeric>
#include <queue>

#include "c2mab/environments.hpp"
#include "c2mab/graphs.hpp"
#include "c2mab/oracles.hpp"
#include "c2mab/policies.hpp"
#include "c2mab/smoothness.hpp"
#include "support.hpp"

using namespace c2mab;

namespace {

Action slate(std::vector<int> arms) { return Action{std::move(arms), ActionKind::ordered_list}; }
Action seeds(std::vector<int> arms) { return Action{std::move(arms), ActionKind::seed_set}; }

std::unique_ptr<PmcEnv> lifted_pmc(BipartiteGraph g, int k, const std::vector<double>& mu) {
  auto [truth, ctx] = one_hot_lift(mu);
  return std::make_unique<PmcEnv>(std::move(g), k, std::move(truth), std::move(ctx));
}

std::unique_ptr<OimEnv> lifted_oim(DirectedGraph g, int k, const std::vector<double>& mu) {
  auto [truth, ctx] = one_hot_lift(mu);
  return std::make_unique<OimEnv>(std::move(g), k, std::move(truth), std::move(ctx));
}

// Breadth-first reachability written independently of the library.
int reachable_count(const DirectedGraph& g, const std::vector<int>& from) {
  std::vector<bool> seen(static_cast<std::size_t>(g.num_nodes), false);
  std::queue<int> q;
  for (int s : from) {
    seen[static_cast<std::size_t>(s)] = true;
    q.push(s);
  }
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    for (const auto& [a, b] : g.edges) {
      if (a == u && !seen[static_cast<std::size_t>(b)]) {
        seen[static_cast<std::size_t>(b)] = true;
        q.push(b);
      }
    }
  }
  return static_cast<int>(std::count(seen.begin(), seen.end(), true));
}

}  // namespace

TEST_CASE("disjunctive play stops at the first success") {
  auto env = testing::lifted_cascade(CascadeForm::disjunctive, 3, {0.0, 1.0, 1.0, 0.0});
  const auto& mu = env->base_means();
  Rng rng(1);
  SUBCASE("outcomes (0,1,.) reveal the first two") {
    const auto fb = env->play(slate({0, 1, 2}), mu, rng);
    CHECK(fb.triggered == std::vector<int>{0, 1});
    CHECK(fb.outcomes == std::vector<unsigned char>{0, 1});
    CHECK(fb.realized_reward == 1.0);
  }
  SUBCASE("all zeros reveal the whole slate") {
    auto zeros = testing::lifted_cascade(CascadeForm::disjunctive, 3, {0.0, 0.0, 0.0, 0.0});
    const auto fb = zeros->play(slate({2, 0, 3}), zeros->base_means(), rng);
    CHECK(fb.triggered == std::vector<int>{2, 0, 3});
    CHECK(fb.realized_reward == 0.0);
  }
  SUBCASE("a first success reveals one arm") {
    const auto fb = env->play(slate({2, 0, 3}), mu, rng);
    CHECK(fb.triggered == std::vector<int>{2});
    CHECK(fb.realized_reward == 1.0);
  }
}

TEST_CASE("disjunctive reward and triggering probabilities") {
  const std::vector<double> half{0.5, 0.5, 0.5};
  CHECK(cascade_expected_reward(CascadeForm::disjunctive, std::vector<int>{0, 1, 2}, half) == doctest::Approx(0.875));
  const std::vector<double> one{0.2, 1.0, 0.3};
  CHECK(cascade_expected_reward(CascadeForm::disjunctive, std::vector<int>{0, 1, 2}, one) == 1.0);
  const std::vector<double> mu{0.2, 0.3};
  CHECK(cascade_expected_reward(CascadeForm::disjunctive, std::vector<int>{0, 1}, mu) == doctest::Approx(0.44));

  auto env = testing::lifted_cascade(CascadeForm::disjunctive, 3, {0.5, 0.5, 0.9, 0.1});
  const auto p = env->triggering_probs(slate({0, 1, 2}), env->base_means());
  CHECK(p[0] == 1.0);
  CHECK(p[2] == doctest::Approx(0.25));
  CHECK(p[3] == 0.0);
}

TEST_CASE("conjunctive reward, play and triggering probabilities") {
  const std::vector<double> mu{0.9, 0.8};
  CHECK(cascade_expected_reward(CascadeForm::conjunctive, std::vector<int>{0, 1}, mu) == doctest::Approx(0.72));
  const std::vector<double> dead{0.9, 0.0, 0.7};
  CHECK(cascade_expected_reward(CascadeForm::conjunctive, std::vector<int>{0, 1, 2}, dead) == 0.0);

  auto env = testing::lifted_cascade(CascadeForm::conjunctive, 2, {0.9, 0.8, 0.3});
  const auto p = env->triggering_probs(slate({0, 1}), env->base_means());
  CHECK(p[1] == doctest::Approx(0.9));
  CHECK(p[2] == 0.0);

  auto det = testing::lifted_cascade(CascadeForm::conjunctive, 3, {1.0, 0.0, 1.0});
  Rng rng(2);
  const auto fb = det->play(slate({0, 1, 2}), det->base_means(), rng);
  CHECK(fb.triggered == std::vector<int>{0, 1});
  CHECK(fb.realized_reward == 0.0);
  auto live = testing::lifted_cascade(CascadeForm::conjunctive, 2, {1.0, 0.0, 1.0});
  const auto all = live->play(slate({2, 0}), live->base_means(), rng);
  CHECK(all.triggered == std::vector<int>{2, 0});
  CHECK(all.realized_reward == 1.0);
}

TEST_CASE("cascade actions are validated") {
  auto env = testing::lifted_cascade(CascadeForm::disjunctive, 2, {0.1, 0.2, 0.3});
  CHECK_THROWS_AS(env->validate_action(slate({0})), std::invalid_argument);
  CHECK_THROWS_AS(env->validate_action(slate({0, 0})), std::invalid_argument);
  CHECK_THROWS_AS(env->validate_action(slate({0, 3})), std::invalid_argument);
  CHECK_NOTHROW(env->validate_action(slate({2, 0})));
  CHECK_THROWS_AS(testing::lifted_cascade(CascadeForm::disjunctive, 4, {0.1, 0.2, 0.3}), std::invalid_argument);
}

TEST_CASE("property: expected number of observed cascade arms equals the sum of triggering probabilities") {
  Rng rng(3);
  for (auto form : {CascadeForm::disjunctive, CascadeForm::conjunctive}) {
    for (int rep = 0; rep < 5; ++rep) {
      auto env = testing::lifted_cascade(form, 4, testing::random_means(7, rng));
      const Action a = env->random_action(rng);
      const auto& mu = env->base_means();
      const auto p = env->triggering_probs(a, mu);
      const double analytic = std::accumulate(p.begin(), p.end(), 0.0);
      const long n = 100000;
      double sum = 0.0;
      double sq = 0.0;
      for (long s = 0; s < n; ++s) {
        const double len = static_cast<double>(env->play(a, mu, rng).triggered.size());
        sum += len;
        sq += len * len;
      }
      const double mean = sum / n;
      const double se = std::sqrt((sq / n - mean * mean) / (n - 1));
      CHECK(std::abs(mean - analytic) <= 4 * se + 1e-12);
    }
  }
}

TEST_CASE("PMC expected reward examples") {
  BipartiteGraph g;
  g.num_sources = 2;
  g.num_targets = 1;
  g.edges = {{0, 0}, {1, 0}};
  auto env = lifted_pmc(g, 2, {0.5, 0.5});
  CHECK(env->expected_reward(seeds({0, 1}), env->base_means()) == doctest::Approx(0.75));

  BipartiteGraph g2;
  g2.num_sources = 2;
  g2.num_targets = 2;
  g2.edges = {{0, 0}, {1, 1}};
  auto env2 = lifted_pmc(g2, 1, {0.4, 0.7});
  CHECK(env2->expected_reward(seeds({0}), env2->base_means()) == doctest::Approx(0.4));

  BipartiteGraph g3;
  g3.num_sources = 1;
  g3.num_targets = 1;
  g3.edges = {{0, 0}};
  auto env3 = lifted_pmc(g3, 1, {0.3});
  CHECK(env3->expected_reward(seeds({0}), env3->base_means()) == doctest::Approx(0.3));
}

TEST_CASE("property: PMC triggers exactly the incident edges on every play") {
  Rng rng(4);
  for (int rep = 0; rep < 20; ++rep) {
    const auto g = testing::random_bipartite(4, 4, 0.5, rng);
    auto env = lifted_pmc(g, 2, testing::random_means(g.num_edges(), rng));
    const Action a = env->random_action(rng);
    std::vector<int> expected;
    for (int e = 0; e < g.num_edges(); ++e) {
      const int u = g.edges[static_cast<std::size_t>(e)].first;
      if (std::find(a.arms.begin(), a.arms.end(), u) != a.arms.end()) expected.push_back(e);
    }
    const auto p = env->triggering_probs(a, env->base_means());
    for (int e = 0; e < g.num_edges(); ++e) {
      const bool in = std::find(expected.begin(), expected.end(), e) != expected.end();
      CHECK(p[static_cast<std::size_t>(e)] == (in ? 1.0 : 0.0));
    }
    for (int play = 0; play < 5; ++play) {
      auto trig = env->play(a, env->base_means(), rng).triggered;
      std::sort(trig.begin(), trig.end());
      CHECK(trig == expected);
    }
  }
}

TEST_CASE("OIM play on a path") {
  DirectedGraph g;
  g.num_nodes = 3;
  g.edges = {{0, 1}, {1, 2}};
  Rng rng(5);
  auto env = lifted_oim(g, 1, {1.0, 1.0});
  const auto fb = env->play(seeds({0}), env->base_means(), rng);
  CHECK(fb.realized_reward == 3.0);
  auto trig = fb.triggered;
  std::sort(trig.begin(), trig.end());
  CHECK(trig == std::vector<int>{0, 1});
  CHECK(env->expected_reward(seeds({0}), env->base_means()) == doctest::Approx(3.0));

  auto cut = lifted_oim(g, 1, {1.0, 0.0});
  CHECK(cut->play(seeds({0}), cut->base_means(), rng).realized_reward == 2.0);

  auto all = lifted_oim(g, 3, {0.3, 0.6});
  for (int rep = 0; rep < 10; ++rep) CHECK(all->play(seeds({0, 1, 2}), all->base_means(), rng).realized_reward == 3.0);
}

TEST_CASE("property: OIM with all means 1 spreads to every reachable node") {
  Rng rng(6);
  for (int rep = 0; rep < 10; ++rep) {
    const auto g = testing::random_dag(7, 0.35, rng);
    if (g.num_edges() == 0) continue;
    auto env = lifted_oim(g, 2, std::vector<double>(static_cast<std::size_t>(g.num_edges()), 1.0));
    const Action a = env->random_action(rng);
    CHECK(env->expected_reward(a, env->base_means()) == doctest::Approx(reachable_count(g, a.arms)));
  }
}

TEST_CASE("OIM exact statistics agree with live-edge sampling") {
  Rng rng(7);
  for (int rep = 0; rep < 5; ++rep) {
    const auto g = testing::random_digraph(6, 12, rng);
    const auto mu = testing::random_means(g.num_edges(), rng);
    const std::vector<int> s{0, 3};
    const auto exact = exact_cascade_stats(g, s, mu);
    std::vector<std::vector<unsigned char>> worlds(40000, std::vector<unsigned char>(static_cast<std::size_t>(g.num_edges())));
    for (auto& w : worlds) {
      for (std::size_t e = 0; e < w.size(); ++e) w[e] = rng.bernoulli(mu[e]) ? 1 : 0;
    }
    const auto est = sampled_cascade_stats(g, s, worlds);
    CHECK(std::abs(est.spread - exact.spread) <= 4 * std::sqrt(6.0 * 6.0 / 4.0 / 40000.0));
    for (std::size_t e = 0; e < exact.edge_trigger.size(); ++e) {
      CHECK(std::abs(est.edge_trigger[e] - exact.edge_trigger[e]) <= 0.02);
    }
  }
}

TEST_CASE("OIM beyond the exact limit switches to deterministic Monte Carlo") {
  Rng rng(8);
  const auto g = testing::random_digraph(8, 30, rng);
  auto env = lifted_oim(g, 2, testing::random_means(g.num_edges(), rng));
  CHECK_FALSE(env->analytic_exact());
  const Action a = seeds({0, 1});
  const double r1 = env->expected_reward(a, env->base_means());
  auto again = lifted_oim(g, 2, env->base_means());
  CHECK(again->expected_reward(a, again->base_means()) == r1);
}

TEST_CASE("rating-matrix environment uses row means and a sampled user") {
  // Item 0 liked by users 0 and 1, item 1 by user 0 only.
  std::vector<std::vector<unsigned char>> ratings{{1, 1}, {1, 0}};
  RatingMatrixCascadeEnv env(FeatureContext{Eigen::MatrixXd::Identity(2, 2)}, ratings, 1);
  CHECK(env.click_rates() == std::vector<double>{1.0, 0.5});
  CHECK(env.num_users() == 2);
  Rng rng(9);
  const auto mu = env.means(env.context(1, rng));
  CHECK(env.expected_reward(slate({1}), mu) == doctest::Approx(0.5));
  int clicks = 0;
  for (int t = 0; t < 20000; ++t) clicks += env.play(slate({1}), mu, rng).realized_reward > 0 ? 1 : 0;
  CHECK(std::abs(clicks / 20000.0 - 0.5) <= 4 * std::sqrt(0.25 / 20000));
  for (int t = 0; t < 10; ++t) CHECK(env.play(slate({0}), mu, rng).realized_reward == 1.0);
}

TEST_CASE("synthetic cascade generator") {
  Rng rng(10);
  const auto inst = gen_synthetic_cascade(100, 10, 10, rng);
  const auto& env = *inst.env;
  CHECK(env.num_arms() == 100);
  CHECK(env.dim() == 10);
  CHECK(env.slate_size() == 10);
  CHECK(env.form() == CascadeForm::disjunctive);
  for (double x : inst.mu) CHECK(x <= 0.1 + 1e-15);
  for (int i = 0; i < 10; ++i) {
    CHECK(inst.mu[static_cast<std::size_t>(i)] >= 2.0 / 30.0 - 1e-15);
  }
  for (int i = 10; i < 100; ++i) CHECK(inst.mu[static_cast<std::size_t>(i)] <= 1.0 / 30.0 + 1e-15);
  auto top = top_k(inst.mu, 10).arms;
  std::sort(top.begin(), top.end());
  std::vector<int> first(10);
  std::iota(first.begin(), first.end(), 0);
  CHECK(top == first);
  CHECK(std::abs(env.truth().theta_star.norm() - 1.0) <= 1e-12);
  for (int i = 0; i < 100; ++i) {
    CHECK(std::abs(env.features().features.row(i).norm() - 1.0) <= 1e-12);
    CHECK(std::abs(env.features().features.row(i).dot(env.truth().theta_star) - inst.mu[static_cast<std::size_t>(i)]) <= 1e-12);
  }
  CHECK_THROWS_AS(gen_synthetic_cascade(10, 3, 1, rng), std::invalid_argument);
}

TEST_CASE("per-round contexts: C2-UCB-T tracks rotating features, a non-contextual baseline cannot") {
  // Arm identities rotate every round, so only per-round features identify
  // the good items.
  auto make_env = [] {
    Rng gen(20);
    return std::make_unique<testing::RotatingContextEnv>(std::move(gen_synthetic_cascade(12, 2, 3, gen).env));
  };
  auto regret = [&](PolicyKind kind) {
    const auto env = make_env();
    PolicyConfig cfg{std::nullopt, std::nullopt, 3000, env->batch_size(), env->dim(), 0.2};
    const Environment* e = env.get();
    auto policy = make_policy(kind, cfg, env->num_arms(), [e](std::span<const double> s) { return e->oracle(s); });
    Rng rng(21);
    double total = 0.0;
    for (long t = 1; t <= cfg.horizon; ++t) {
      const auto ctx = env->context(t, rng);
      const auto mu = env->means(ctx);
      const auto a = policy->select(t, ctx);
      policy->update(ctx, env->play(a, mu, rng));
      total += env->expected_reward(env->oracle(mu), mu) - env->expected_reward(a, mu);
    }
    return total;
  };
  const double contextual = regret(PolicyKind::c2ucbt);
  const double baseline = regret(PolicyKind::cucb);
  CHECK(contextual < 0.5 * baseline);
}
