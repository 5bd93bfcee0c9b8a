#pragma once

#include <cstdint>
#include <vector>

#include "leap/graph.hpp"
#include "leap/rng.hpp"

namespace leap {

// Synthetic two-class generator. Class 0 graphs are two-block community
// graphs (dense within blocks, sparse across); class 1 graphs are uniform
// random graphs at matched expected density. Features are Gaussian around a
// class-conditional mean so the signal lives in both structure and features.
struct GeneratorSpec {
  std::size_t num_classes = 2;
  std::size_t graphs_per_class = 100;
  std::size_t nodes_min = 18;
  std::size_t nodes_max = 22;
  std::size_t feature_dim = 8;
  double p_in = 0.55;
  double p_out = 0.08;
  double feature_shift = 0.08;  // magnitude of the class-conditional mean
  double feature_noise = 1.0;
  // Hub nodes wired to most of the graph, added identically to both classes.
  // They give the edit policy genuinely high-leverage targets.
  std::size_t hubs = 2;
  double hub_degree = 0.45;

  // Node-level variant: one graph, `num_classes` blocks, labels = block ids.
  std::size_t node_task_nodes = 60;
};

std::vector<Graph> generate_synthetic_dataset(const GeneratorSpec& spec, std::uint64_t seed);

// Single community graph with per-node labels for the node-level task.
Graph generate_node_task_graph(const GeneratorSpec& spec, std::uint64_t seed);

struct DatasetSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
  std::uint64_t seed = 0;
};

// Disjoint exhaustive split; sizes within one item of size*ratio.
DatasetSplit split_dataset(std::size_t count, const std::vector<double>& ratios,
                           std::uint64_t seed);

// Class-stratified subsample of `train`; labels[i] is the label of item
// train[i]'s underlying instance. shots == train.size() returns train as-is.
std::vector<std::size_t> few_shot(const std::vector<std::size_t>& train,
                                  const std::vector<int>& labels, std::size_t shots,
                                  std::uint64_t seed);

}  // namespace leap
