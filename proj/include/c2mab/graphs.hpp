#pragma once

#include <span>
#include <utility>
#include <vector>

namespace c2mab {

/// Bipartite coverage graph: sources [0, num_sources), targets
/// [0, num_targets). Edge e = (u, v) is base arm e.
struct BipartiteGraph {
  int num_sources = 0;
  int num_targets = 0;
  std::vector<std::pair<int, int>> edges;

  /// Checks ids and rebuilds the incidence lists.
  void finalize();
  const std::vector<int>& incident(int source) const { return by_source_[static_cast<std::size_t>(source)]; }
  int num_edges() const { return static_cast<int>(edges.size()); }

 private:
  std::vector<std::vector<int>> by_source_;
};

/// sum_v (1 - prod_{u in S} (1 - mu_{u,v})).
double coverage_value(const BipartiteGraph& graph, std::span<const int> sources,
                      std::span<const double> mu);

/// Directed graph for independent-cascade propagation; edge e is base arm e.
struct DirectedGraph {
  int num_nodes = 0;
  std::vector<std::pair<int, int>> edges;

  void finalize();
  const std::vector<int>& out_edges(int node) const { return out_[static_cast<std::size_t>(node)]; }
  int num_edges() const { return static_cast<int>(edges.size()); }

 private:
  std::vector<std::vector<int>> out_;
};

/// Nodes reachable from `seeds` using edges with live[e] != 0 (all edges when
/// live is empty). Seeds count as reached.
std::vector<unsigned char> reachable_nodes(const DirectedGraph& graph, std::span<const int> seeds,
                                           std::span<const unsigned char> live = {});

struct CascadeStats {
  double spread = 0.0;                  // expected number of reached nodes
  std::vector<double> edge_trigger;     // P[source of e is reached]
};

/// Largest number of edges that exact_cascade_stats will enumerate.
inline constexpr int kExactEdgeLimit = 20;

/// Exact spread and edge triggering probabilities by live-edge enumeration
/// over the edges reachable from the seeds in the full graph. Throws when
/// more than kExactEdgeLimit such edges exist.
CascadeStats exact_cascade_stats(const DirectedGraph& graph, std::span<const int> seeds,
                                 std::span<const double> mu);

/// Same quantities averaged over the given live-edge worlds.
CascadeStats sampled_cascade_stats(const DirectedGraph& graph, std::span<const int> seeds,
                                   const std::vector<std::vector<unsigned char>>& worlds);

}  // namespace c2mab
