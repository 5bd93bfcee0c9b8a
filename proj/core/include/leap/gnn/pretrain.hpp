#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "leap/gnn/gin.hpp"
#include "leap/graph.hpp"

namespace leap::gnn {

struct PretrainConfig {
  std::size_t epochs = 30;
  double lr = 0.01;
  double momentum = 0.0;
};

struct PretrainResult {
  GinModel model;               // returned frozen
  std::vector<double> losses;   // mean BCE per epoch
};

// Masked-edge pretraining: score node pairs with sigmoid(h_u . h_v) and fit
// BCE against edge-present labels, sampling one negative (absent) pair per
// positive. The returned model is frozen.
PretrainResult pretrain_masked_edge(GinModel model, const std::vector<Graph>& graphs,
                                    const PretrainConfig& config, std::uint64_t seed);

// Eval-mode pair scores, for held-out edge AUC checks.
std::vector<double> edge_scores(const GinModel& model, const Graph& g,
                                const std::vector<std::pair<std::size_t, std::size_t>>& pairs);

}  // namespace leap::gnn
