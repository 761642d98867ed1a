#pragma once

#include <cstdint>
#include <span>

#include "c2mab/graphs.hpp"
#include "c2mab/model.hpp"

namespace c2mab {

// Offline oracles. Every tie is broken toward the smaller arm/node index.

/// The k largest scores ordered by descending score. Exact maximizer of both
/// disjunctive and conjunctive cascade rewards.
Action top_k(std::span<const double> scores, int k);

/// Plain greedy on coverage_value; a (1 - 1/e)-approximation.
Action greedy_coverage(std::span<const double> mu, const BipartiteGraph& graph, int k);

/// Plain greedy for influence maximization. Marginal spreads come from exact
/// enumeration when the graph has at most kExactEdgeLimit edges, otherwise
/// from `mc_samples` live-edge worlds drawn once from `seed` and shared by
/// every candidate.
Action greedy_im(std::span<const double> mu, const DirectedGraph& graph, int k, int mc_samples,
                 std::uint64_t seed);

inline constexpr double kBruteForceLimit = 2e6;

/// C(n, k) as a double.
double binomial(int n, int k);

struct BruteForceResult {
  Action action;
  double value = 0.0;
};

/// Exact argmax of env.expected_reward(., mu) over all action_size()-subsets
/// of the action pool, enumerated in lexicographic order; the first maximum
/// wins. Throws std::length_error above kBruteForceLimit candidates.
BruteForceResult brute_force_best(const Environment& env, std::span<const double> mu);

}  // namespace c2mab
