#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "c2mab/environments.hpp"
#include "c2mab/io.hpp"
#include "c2mab/smoothness.hpp"
#include "support.hpp"

using namespace c2mab;

namespace {

Action slate(std::vector<int> arms) { return Action{std::move(arms), ActionKind::ordered_list}; }

CheckOptions trials(long n) {
  CheckOptions o;
  o.trials = n;
  return o;
}

std::unique_ptr<PmcEnv> random_pmc(Rng& rng) {
  const int L = 2 + static_cast<int>(rng.below(4));
  const int V = 1 + static_cast<int>(rng.below(5));
  auto g = testing::random_bipartite(L, V, 0.5, rng);
  auto [truth, ctx] = one_hot_lift(testing::random_means(g.num_edges(), rng));
  const int k = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(std::min(L, 3))));
  return std::make_unique<PmcEnv>(std::move(g), k, std::move(truth), std::move(ctx));
}

void check_replays(const Environment& env, const ConditionReport& r) {
  REQUIRE_FALSE(r.pass);
  REQUIRE(r.counterexample.has_value());
  CHECK(r.worst_ratio > 1.0);
  const Sides s = evaluate_condition(env, r.kind, r.coeffs, *r.counterexample);
  CHECK(s.lhs > s.rhs * (1.0 + 1e-9));
  CHECK(violation_ratio(s) == doctest::Approx(r.worst_ratio).epsilon(1e-12));
}

}  // namespace

TEST_CASE("condition names round-trip") {
  for (const char* n : {"mono", "tpm", "vm", "tpvm", "tp-smooth"}) CHECK(to_string(parse_condition_kind(n)) == n);
  CHECK_THROWS_AS(parse_condition_kind("tpvm2"), std::invalid_argument);
}

TEST_CASE("monotonicity example and equality") {
  auto env = testing::lifted_cascade(CascadeForm::disjunctive, 2, {0.2, 0.3});
  ConditionInstance inst{slate({0, 1}), {0.2, 0.3}, {0.3, 0.3}};
  const Sides s = evaluate_condition(*env, ConditionKind::monotonicity, {}, inst);
  CHECK(s.lhs == doctest::Approx(0.44));
  CHECK(s.rhs == doctest::Approx(0.51));
  inst.mu_prime = inst.mu;
  CHECK(violation_ratio(evaluate_condition(*env, ConditionKind::monotonicity, {}, inst)) <= 1.0);
}

TEST_CASE("TPM with mu' = mu gives 0 <= 0") {
  auto env = testing::lifted_cascade(CascadeForm::disjunctive, 2, {0.2, 0.3, 0.6});
  ConditionInstance inst{slate({2, 0}), {0.2, 0.3, 0.6}, {0.2, 0.3, 0.6}};
  const Sides s = evaluate_condition(*env, ConditionKind::tpm, {}, inst);
  CHECK(s.lhs == 0.0);
  CHECK(s.rhs == 0.0);
  CHECK(violation_ratio(s) == 0.0);
}

TEST_CASE("TPM with B1 = 0.5 on a disjunctive cascade is falsified near ratio 2") {
  auto env = testing::lifted_cascade(CascadeForm::disjunctive, 3, {0.1, 0.2, 0.3, 0.4, 0.5});
  Rng rng(1);
  const auto r = check_tpm(*env, 0.5, trials(3000), rng);
  check_replays(*env, r);
  CHECK(r.worst_ratio <= 2.0 + 1e-9);
  CHECK(r.worst_ratio > 1.9);
}

TEST_CASE("VM with a too small Bv and B1 = 0 is falsified on PMC") {
  Rng rng(2);
  auto env = random_pmc(rng);
  const auto r = check_vm(*env, 0.1, 0.0, trials(500), rng);
  check_replays(*env, r);
}

TEST_CASE("TPVM with a too small Bv is falsified on a disjunctive cascade") {
  auto env = testing::lifted_cascade(CascadeForm::disjunctive, 3, {0.1, 0.2, 0.3, 0.4});
  Rng rng(3);
  const auto r = check_tpvm(*env, 0.05, 0.05, 2.0, trials(500), rng);
  check_replays(*env, r);
}

TEST_CASE("tp-smoothness with a too small Bp is falsified on a conjunctive cascade") {
  auto env = testing::lifted_cascade(CascadeForm::conjunctive, 3, {0.1, 0.2, 0.3, 0.4});
  Rng rng(4);
  const auto r = check_tp_smoothness(*env, 0.3, trials(500), rng);
  check_replays(*env, r);
  CHECK(r.counterexample->arm >= 0);
}

TEST_CASE("a zero zeta split reduces VM to the 1-norm bound") {
  auto env = testing::lifted_cascade(CascadeForm::disjunctive, 2, {0.2, 0.3, 0.4});
  ConditionInstance inst{slate({0, 1}), {0.2, 0.3, 0.4}, {0.5, 0.1, 0.9}};
  inst.zeta = {0.0, 0.0, 0.0};
  inst.eta = {0.3, -0.2, 0.5};
  const Sides s = evaluate_condition(*env, ConditionKind::vm, Coefficients{0.7, 123.0, 0.0, 1.0}, inst);
  // Only S-tilde = {0, 1} enters the sum.
  CHECK(s.rhs == doctest::Approx(0.7 * (0.3 + 0.2)));
}

TEST_CASE("TPVM with lambda = 0 equals VM when triggering is deterministic") {
  Rng rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    auto env = random_pmc(rng);
    const int m = env->num_arms();
    ConditionInstance inst;
    inst.action = env->random_action(rng);
    for (int i = 0; i < m; ++i) {
      inst.mu.push_back(rng.uniform(0.05, 0.95));
      inst.mu_prime.push_back(rng.uniform(0.05, 0.95));
      const double t = rng.uniform();
      inst.zeta.push_back(t * (inst.mu_prime.back() - inst.mu.back()));
      inst.eta.push_back((1 - t) * (inst.mu_prime.back() - inst.mu.back()));
    }
    const Coefficients c{1.0, 2.5, 0.0, 1.0};
    const Sides vm = evaluate_condition(*env, ConditionKind::vm, c, inst);
    const Sides tpvm = evaluate_condition(*env, ConditionKind::tpvm, c, inst);
    CHECK(vm.lhs == tpvm.lhs);
    CHECK(vm.rhs == doctest::Approx(tpvm.rhs).epsilon(1e-14));
  }
}

TEST_CASE("the first slate position has constant triggering probability") {
  auto env = testing::lifted_cascade(CascadeForm::disjunctive, 3, {0.1, 0.2, 0.3, 0.4});
  Rng rng(6);
  for (int rep = 0; rep < 100; ++rep) {
    ConditionInstance inst{env->random_action(rng), testing::random_means(4, rng), testing::random_means(4, rng)};
    inst.arm = inst.action.arms.front();
    CHECK(evaluate_condition(*env, ConditionKind::tp_smoothness, {}, inst).lhs == 0.0);
  }
}

TEST_CASE("property: documented coefficients pass on random small instances") {
  Rng rng(7);
  for (int rep = 0; rep < 5; ++rep) {
    const int m = 3 + static_cast<int>(rng.below(5));
    const int k = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(std::min(m, 6))));
    auto dis = testing::lifted_cascade(CascadeForm::disjunctive, k, testing::random_means(m, rng));
    CHECK(check_tpvm(*dis, 1, 1, 2, trials(1000), rng).pass);
    CHECK(check_tpm(*dis, 1, trials(1000), rng).pass);
    CHECK(check_tp_smoothness(*dis, 1, trials(1000), rng).pass);
    auto con = testing::lifted_cascade(CascadeForm::conjunctive, k, testing::random_means(m, rng));
    CHECK(check_tpvm(*con, 1, 1, 1, trials(1000), rng).pass);
    CHECK(check_tp_smoothness(*con, 1, trials(1000), rng).pass);
    auto pmc = random_pmc(rng);
    CHECK(check_vm(*pmc, 3 * std::sqrt(2.0 * pmc->graph().num_targets), 1, trials(1000), rng).pass);
    CHECK(check_monotonicity(*pmc, trials(1000), rng).pass);
  }
}

TEST_CASE("property: reports are deterministic given the seed") {
  auto env = make_builtin_env("conjunctive");
  Rng a(8);
  Rng b(8);
  const auto ra = check_tpvm(*env, 0.2, 0.2, 1, trials(300), a);
  const auto rb = check_tpvm(*env, 0.2, 0.2, 1, trials(300), b);
  CHECK(to_json(ra).dump() == to_json(rb).dump());
  const auto j = to_json(ra);
  CHECK(j.at("verdict") == "counterexample");
  CHECK(j.at("condition") == "tpvm");
  CHECK(j.at("trials") == 300);
  CHECK(j.at("counterexample").contains("zeta"));
}

TEST_CASE("VM checks reject a mean range touching 0 or 1") {
  auto env = make_builtin_env("pmc");
  CheckOptions o = trials(10);
  o.interior_lo = 0.0;
  Rng rng(9);
  CHECK_THROWS_AS(check_vm(*env, 1, 1, o, rng), std::invalid_argument);
}

TEST_CASE("Monte-Carlo estimates on small cases") {
  Rng rng(10);
  auto env = testing::lifted_cascade(CascadeForm::disjunctive, 2, {0.5, 0.5});
  const auto r = mc_expected_reward(*env, slate({0, 1}), env->base_means(), 100000, rng);
  CHECK(std::abs(r.mean - 0.75) <= 4 * r.std_error);
  const auto f = mc_triggering_freq(*env, slate({0, 1}), env->base_means(), 100000, rng);
  CHECK(f[0].mean == 1.0);
  CHECK(std::abs(f[1].mean - 0.5) <= 4 * f[1].std_error);

  auto pmc = make_builtin_env("pmc");
  const Action s{{0, 2}, ActionKind::seed_set};
  const auto mu = pmc->means(pmc->context(1, rng));
  const auto pf = mc_triggering_freq(*pmc, s, mu, 1000, rng);
  const auto p = pmc->triggering_probs(s, mu);
  for (std::size_t e = 0; e < p.size(); ++e) CHECK(pf[e].mean == p[e]);

  DirectedGraph g;
  g.num_nodes = 3;
  g.edges = {{0, 1}, {1, 2}};
  auto [truth, ctx] = one_hot_lift(std::vector<double>{1.0, 1.0});
  OimEnv oim(g, 1, std::move(truth), std::move(ctx));
  const auto o = mc_expected_reward(oim, Action{{0}, ActionKind::seed_set}, oim.base_means(), 1000, rng);
  CHECK(o.mean == 3.0);
  CHECK(o.std_error == 0.0);
}

TEST_CASE("contract check passes on every builtin environment") {
  for (const auto& name : builtin_env_names()) {
    auto env = make_builtin_env(name);
    Rng rng(11);
    const auto mu = env->means(env->context(1, rng));
    const auto rep = contract_check(*env, env->random_action(rng), mu, 50000, rng);
    CHECK_MESSAGE(rep.pass, name);
    CHECK(rep.lines.size() == static_cast<std::size_t>(env->num_arms()) + 1);
  }
}

TEST_CASE("contract check detects a wrong analytic reward") {
  // A disjunctive cascade whose analytic reward is deliberately off by 0.05.
  class Skewed final : public CascadeEnv {
   public:
    using CascadeEnv::CascadeEnv;
    double expected_reward(const Action& a, std::span<const double> mu) const override {
      return CascadeEnv::expected_reward(a, mu) + 0.05;
    }
  };
  auto [truth, ctx] = one_hot_lift(std::vector<double>{0.3, 0.4, 0.5});
  Skewed env(CascadeForm::disjunctive, 2, truth, ctx);
  Rng rng(12);
  const auto rep = contract_check(env, slate({0, 1}), env.base_means(), 100000, rng);
  CHECK_FALSE(rep.pass);
  CHECK_FALSE(rep.lines.front().pass);
}
