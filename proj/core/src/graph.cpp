#include "leap/graph.hpp"

#include <deque>
#include <limits>
#include <string>

#include "leap/errors.hpp"

namespace leap {

std::vector<std::pair<std::size_t, std::size_t>> Graph::edges() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < num_nodes; ++i)
    for (std::size_t j = i + 1; j < num_nodes; ++j)
      if (adjacency.at(i, j) != 0.0) out.emplace_back(i, j);
  return out;
}

void Graph::validate() const {
  if (num_nodes < 1) throw GraphError("graph must have at least one node");
  if (adjacency.rows() != num_nodes || adjacency.cols() != num_nodes)
    throw GraphError("adjacency shape " + adjacency.shape_str() + " does not match N=" +
                     std::to_string(num_nodes));
  if (features.rows() != num_nodes || features.cols() < 1)
    throw GraphError("features shape " + features.shape_str() + " does not match N=" +
                     std::to_string(num_nodes));
  for (std::size_t i = 0; i < num_nodes; ++i) {
    if (adjacency.at(i, i) != 0.0)
      throw GraphError("adjacency has a self-loop at node " + std::to_string(i));
    for (std::size_t j = 0; j < num_nodes; ++j) {
      const double a = adjacency.at(i, j);
      if (a != 0.0 && a != 1.0)
        throw GraphError("adjacency entries must be 0 or 1");
      if (a != adjacency.at(j, i))
        throw GraphError("adjacency is not symmetric at (" + std::to_string(i) + "," +
                         std::to_string(j) + ")");
    }
  }
  if (!features.all_finite()) throw GraphError("features contain non-finite values");
  if (!node_labels.empty() && node_labels.size() != num_nodes)
    throw GraphError("node_labels length does not match N");
}

Graph make_graph(Tensor adjacency, Tensor features, std::optional<int> graph_label,
                 std::vector<int> node_labels) {
  Graph g;
  g.num_nodes = adjacency.rows();
  g.adjacency = std::move(adjacency);
  g.features = std::move(features);
  g.graph_label = graph_label;
  g.node_labels = std::move(node_labels);
  g.validate();
  return g;
}

DiffusionMatrix diffusion(const Tensor& adjacency, double epsilon) {
  if (epsilon < 0.0) throw GraphError("diffusion: epsilon must be non-negative");
  const std::size_t n = adjacency.rows();
  if (adjacency.cols() != n) throw GraphError("diffusion: adjacency must be square");
  for (std::size_t i = 0; i < n; ++i) {
    if (adjacency.at(i, i) != 0.0) throw GraphError("diffusion: adjacency diagonal must be zero");
    for (std::size_t j = i + 1; j < n; ++j)
      if (adjacency.at(i, j) != adjacency.at(j, i))
        throw GraphError("diffusion: adjacency must be symmetric");
  }
  DiffusionMatrix s;
  s.epsilon = epsilon;
  s.values = adjacency;
  for (std::size_t i = 0; i < n; ++i) s.values.at(i, i) += 1.0 + epsilon;
  return s;
}

std::vector<std::size_t> bfs_distances(const Tensor& adjacency, std::size_t source) {
  const std::size_t n = adjacency.rows();
  constexpr std::size_t kInf = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> dist(n, kInf);
  std::deque<std::size_t> queue{source};
  dist[source] = 0;
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    for (std::size_t v = 0; v < n; ++v) {
      if (adjacency.at(u, v) != 0.0 && dist[v] == kInf) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

InducedSubgraph induced_subgraph(const Graph& g, std::size_t center, std::size_t hops) {
  if (center >= g.num_nodes)
    throw IndexError("induced_subgraph: node " + std::to_string(center) + " out of range for N=" +
                     std::to_string(g.num_nodes));
  if (hops < 1) throw GraphError("induced_subgraph: hops must be >= 1");

  const auto dist = bfs_distances(g.adjacency, center);
  std::vector<std::size_t> keep;
  for (std::size_t v = 0; v < g.num_nodes; ++v)
    if (dist[v] <= hops) keep.push_back(v);

  const std::size_t m = keep.size();
  Tensor adj(m, m);
  Tensor feat(m, g.feature_dim());
  std::vector<int> labels;
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) adj.at(a, b) = g.adjacency.at(keep[a], keep[b]);
    for (std::size_t d = 0; d < g.feature_dim(); ++d) feat.at(a, d) = g.features.at(keep[a], d);
    if (!g.node_labels.empty()) labels.push_back(g.node_labels[keep[a]]);
  }

  InducedSubgraph out;
  out.hops = hops;
  out.index_map = keep;
  for (std::size_t a = 0; a < m; ++a)
    if (keep[a] == center) out.center = a;
  out.subgraph = make_graph(std::move(adj), std::move(feat), std::nullopt, std::move(labels));
  return out;
}

}  // namespace leap
