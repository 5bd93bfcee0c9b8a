#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "leap/tensor.hpp"

namespace leap {

// Undirected simple graph: symmetric zero-diagonal 0/1 adjacency plus a node
// feature matrix. Optional graph-level label and per-node labels. Immutable
// once validated; share freely.
struct Graph {
  std::size_t num_nodes = 0;
  Tensor adjacency;  // N x N, entries in {0,1}
  Tensor features;   // N x D
  std::optional<int> graph_label;
  std::vector<int> node_labels;  // empty or length N

  std::size_t feature_dim() const { return features.cols(); }
  std::vector<std::pair<std::size_t, std::size_t>> edges() const;  // i < j
  std::size_t num_edges() const { return edges().size(); }

  // Throws GraphError when any invariant is violated.
  void validate() const;
};

Graph make_graph(Tensor adjacency, Tensor features,
                 std::optional<int> graph_label = std::nullopt,
                 std::vector<int> node_labels = {});

// S = A + (1 + epsilon) I.
struct DiffusionMatrix {
  Tensor values;  // N x N
  double epsilon = 0.0;
};

DiffusionMatrix diffusion(const Tensor& adjacency, double epsilon);

// The n-hop ball around `center`, with features and edges restricted to it.
struct InducedSubgraph {
  std::size_t center = 0;        // index of the center inside `subgraph`
  std::size_t hops = 0;
  Graph subgraph;
  std::vector<std::size_t> index_map;  // subgraph node -> original node
};

InducedSubgraph induced_subgraph(const Graph& g, std::size_t center, std::size_t hops);

// BFS distances from `source`; unreachable nodes get SIZE_MAX.
std::vector<std::size_t> bfs_distances(const Tensor& adjacency, std::size_t source);

}  // namespace leap
