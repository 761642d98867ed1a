#include "c2mab/graphs.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>

namespace c2mab {

void BipartiteGraph::finalize() {
  if (num_sources < 1 || num_targets < 1) throw std::invalid_argument("empty bipartite graph");
  by_source_.assign(static_cast<std::size_t>(num_sources), {});
  for (int e = 0; e < num_edges(); ++e) {
    const auto [u, v] = edges[static_cast<std::size_t>(e)];
    if (u < 0 || u >= num_sources || v < 0 || v >= num_targets) {
      throw std::invalid_argument("bipartite edge " + std::to_string(e) + " out of range");
    }
    by_source_[static_cast<std::size_t>(u)].push_back(e);
  }
}

double coverage_value(const BipartiteGraph& graph, std::span<const int> sources,
                      std::span<const double> mu) {
  std::vector<double> miss(static_cast<std::size_t>(graph.num_targets), 1.0);
  for (int u : sources) {
    for (int e : graph.incident(u)) {
      const int v = graph.edges[static_cast<std::size_t>(e)].second;
      miss[static_cast<std::size_t>(v)] *= 1.0 - mu[static_cast<std::size_t>(e)];
    }
  }
  double value = 0.0;
  for (double q : miss) value += 1.0 - q;
  return value;
}

void DirectedGraph::finalize() {
  if (num_nodes < 1) throw std::invalid_argument("empty graph");
  out_.assign(static_cast<std::size_t>(num_nodes), {});
  for (int e = 0; e < num_edges(); ++e) {
    const auto [u, v] = edges[static_cast<std::size_t>(e)];
    if (u < 0 || u >= num_nodes || v < 0 || v >= num_nodes) {
      throw std::invalid_argument("edge " + std::to_string(e) + " out of range");
    }
    out_[static_cast<std::size_t>(u)].push_back(e);
  }
}

std::vector<unsigned char> reachable_nodes(const DirectedGraph& graph, std::span<const int> seeds,
                                           std::span<const unsigned char> live) {
  std::vector<unsigned char> seen(static_cast<std::size_t>(graph.num_nodes), 0);
  std::vector<int> stack;
  for (int s : seeds) {
    if (!seen[static_cast<std::size_t>(s)]) {
      seen[static_cast<std::size_t>(s)] = 1;
      stack.push_back(s);
    }
  }
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int e : graph.out_edges(u)) {
      if (!live.empty() && !live[static_cast<std::size_t>(e)]) continue;
      const int v = graph.edges[static_cast<std::size_t>(e)].second;
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = 1;
        stack.push_back(v);
      }
    }
  }
  return seen;
}

namespace {

void accumulate(const DirectedGraph& graph, const std::vector<unsigned char>& reached,
                double weight, CascadeStats& stats) {
  for (std::size_t v = 0; v < reached.size(); ++v) {
    if (reached[v]) stats.spread += weight;
  }
  for (int e = 0; e < graph.num_edges(); ++e) {
    if (reached[static_cast<std::size_t>(graph.edges[static_cast<std::size_t>(e)].first)]) {
      stats.edge_trigger[static_cast<std::size_t>(e)] += weight;
    }
  }
}

}  // namespace

CascadeStats exact_cascade_stats(const DirectedGraph& graph, std::span<const int> seeds,
                                 std::span<const double> mu) {
  // Only edges leaving nodes reachable in the full graph can matter.
  const auto full = reachable_nodes(graph, seeds);
  std::vector<int> relevant;
  for (int e = 0; e < graph.num_edges(); ++e) {
    if (full[static_cast<std::size_t>(graph.edges[static_cast<std::size_t>(e)].first)]) {
      relevant.push_back(e);
    }
  }
  if (static_cast<int>(relevant.size()) > kExactEdgeLimit) {
    throw std::invalid_argument("exact spread needs at most " + std::to_string(kExactEdgeLimit) +
                                " reachable edges, got " + std::to_string(relevant.size()));
  }

  CascadeStats stats;
  stats.edge_trigger.assign(static_cast<std::size_t>(graph.num_edges()), 0.0);
  std::vector<unsigned char> live(static_cast<std::size_t>(graph.num_edges()), 0);
  const std::uint32_t worlds = std::uint32_t{1} << relevant.size();
  for (std::uint32_t mask = 0; mask < worlds; ++mask) {
    double weight = 1.0;
    for (std::size_t j = 0; j < relevant.size() && weight > 0.0; ++j) {
      const auto e = static_cast<std::size_t>(relevant[j]);
      const bool on = (mask >> j) & 1U;
      live[e] = on;
      weight *= on ? mu[e] : 1.0 - mu[e];
    }
    if (weight <= 0.0) continue;
    accumulate(graph, reachable_nodes(graph, seeds, live), weight, stats);
  }
  return stats;
}

CascadeStats sampled_cascade_stats(const DirectedGraph& graph, std::span<const int> seeds,
                                   const std::vector<std::vector<unsigned char>>& worlds) {
  CascadeStats stats;
  stats.edge_trigger.assign(static_cast<std::size_t>(graph.num_edges()), 0.0);
  if (worlds.empty()) throw std::invalid_argument("no live-edge worlds supplied");
  const double w = 1.0 / static_cast<double>(worlds.size());
  for (const auto& live : worlds) accumulate(graph, reachable_nodes(graph, seeds, live), w, stats);
  return stats;
}

}  // namespace c2mab
