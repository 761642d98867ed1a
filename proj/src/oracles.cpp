#include "c2mab/oracles.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "c2mab/rng.hpp"

namespace c2mab {

Action top_k(std::span<const double> scores, int k) {
  const int m = static_cast<int>(scores.size());
  if (k < 0 || k > m) {
    throw std::invalid_argument("top_k: k=" + std::to_string(k) + " exceeds m=" + std::to_string(m));
  }
  std::vector<int> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return scores[static_cast<std::size_t>(a)] > scores[static_cast<std::size_t>(b)];
  });
  order.resize(static_cast<std::size_t>(k));
  return Action{std::move(order), ActionKind::ordered_list};
}

Action greedy_coverage(std::span<const double> mu, const BipartiteGraph& graph, int k) {
  if (k < 0 || k > graph.num_sources) throw std::invalid_argument("greedy_coverage: k exceeds |L|");
  std::vector<int> chosen;
  std::vector<unsigned char> used(static_cast<std::size_t>(graph.num_sources), 0);
  for (int step = 0; step < k; ++step) {
    int best = -1;
    double best_value = -1.0;
    for (int u = 0; u < graph.num_sources; ++u) {
      if (used[static_cast<std::size_t>(u)]) continue;
      chosen.push_back(u);
      const double value = coverage_value(graph, chosen, mu);
      chosen.pop_back();
      if (value > best_value) {
        best_value = value;
        best = u;
      }
    }
    chosen.push_back(best);
    used[static_cast<std::size_t>(best)] = 1;
  }
  return Action{std::move(chosen), ActionKind::seed_set};
}

Action greedy_im(std::span<const double> mu, const DirectedGraph& graph, int k, int mc_samples,
                 std::uint64_t seed) {
  if (k < 0 || k > graph.num_nodes) throw std::invalid_argument("greedy_im: k exceeds |V|");
  if (mc_samples < 1) throw std::invalid_argument("greedy_im: mc_samples must be >= 1");

  const bool exact = graph.num_edges() <= kExactEdgeLimit;
  std::vector<std::vector<unsigned char>> worlds;
  if (!exact) {
    Rng rng(seed);
    worlds.assign(static_cast<std::size_t>(mc_samples),
                  std::vector<unsigned char>(static_cast<std::size_t>(graph.num_edges())));
    for (auto& w : worlds) {
      for (std::size_t e = 0; e < w.size(); ++e) w[e] = rng.bernoulli(mu[e]);
    }
  }
  auto spread = [&](const std::vector<int>& seeds) {
    return exact ? exact_cascade_stats(graph, seeds, mu).spread
                 : sampled_cascade_stats(graph, seeds, worlds).spread;
  };

  std::vector<int> chosen;
  std::vector<unsigned char> used(static_cast<std::size_t>(graph.num_nodes), 0);
  for (int step = 0; step < k; ++step) {
    int best = -1;
    double best_value = -1.0;
    for (int v = 0; v < graph.num_nodes; ++v) {
      if (used[static_cast<std::size_t>(v)]) continue;
      chosen.push_back(v);
      const double value = spread(chosen);
      chosen.pop_back();
      if (value > best_value) {
        best_value = value;
        best = v;
      }
    }
    chosen.push_back(best);
    used[static_cast<std::size_t>(best)] = 1;
  }
  return Action{std::move(chosen), ActionKind::seed_set};
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double c = 1.0;
  for (int j = 1; j <= k; ++j) c = c * static_cast<double>(n - k + j) / static_cast<double>(j);
  return c;
}

BruteForceResult brute_force_best(const Environment& env, std::span<const double> mu) {
  const int n = env.action_pool();
  const int k = env.action_size();
  if (binomial(n, k) > kBruteForceLimit) {
    throw std::length_error("brute force over C(" + std::to_string(n) + "," + std::to_string(k) +
                            ") actions exceeds the candidate limit");
  }
  std::vector<int> combo(static_cast<std::size_t>(k));
  std::iota(combo.begin(), combo.end(), 0);
  BruteForceResult best;
  best.value = -1.0;
  Action candidate{{}, env.action_kind()};
  while (true) {
    candidate.arms = combo;
    const double value = env.expected_reward(candidate, mu);
    if (value > best.value) {
      best.value = value;
      best.action = candidate;
    }
    // Next combination in lexicographic order.
    int i = k - 1;
    while (i >= 0 && combo[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) break;
    ++combo[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j) combo[static_cast<std::size_t>(j)] = combo[static_cast<std::size_t>(j - 1)] + 1;
  }
  return best;
}

}  // namespace c2mab
