#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "leap/dataset.hpp"
#include "leap/gnn/checkpoint.hpp"
#include "leap/gnn/gin.hpp"
#include "leap/graph.hpp"
#include "leap/train/config.hpp"
#include "leap/train/metrics.hpp"

namespace leap::train {

// One classification instance: the graph itself for graph-level tasks, or an
// induced subgraph around the labeled node for node-level tasks.
struct Instance {
  Graph graph;
  int label = 0;
};

struct TaskData {
  std::vector<Instance> instances;
  DatasetSplit split;  // few-shot subsampling already applied to train
  std::size_t num_classes = 2;
  std::size_t max_nodes = 0;
  std::size_t feature_dim = 0;
};

// Generate (or load from config.data_dir) the instances and split.
TaskData build_task_data(const RunConfig& config);
TaskData task_data_from_graphs(std::vector<Graph> graphs, const RunConfig& config);

gnn::GinModel pretrain_backbone(const RunConfig& config, const TaskData& data);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double train_metric = 0.0;
  double val_metric = 0.0;
  double mean_ecr = 0.0;
  double mean_distinct_edited = 0.0;
};

struct RunMetrics {
  double roc_auc = 0.0;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  std::vector<EpochRecord> curve;
  std::size_t epochs_run = 0;
  std::size_t policy_updates = 0;
  std::size_t best_epoch = 0;
  double best_val_metric = 0.0;
  // Averaged over all rollout episodes of the run.
  double mean_distinct_edited = 0.0;
  double mean_episode_edits = 0.0;
  std::size_t episodes = 0;
  std::uint64_t backbone_checksum = 0;
};

struct TrainResult {
  RunMetrics metrics;
  gnn::CheckpointData checkpoint;
};

// Full training loop: per epoch, (1) basic prompts, (2) rollouts with prompt
// editing, (3) policy updates every h epochs, (4) deterministic replay with
// sigma = 0 followed by head + prompt updates, early stopping on the
// validation metric. The backbone must arrive frozen and is never touched.
TrainResult train_leap(const TaskData& data, const gnn::GinModel& backbone,
                       const RunConfig& config, Variant variant,
                       std::ostream* trajectory_dump = nullptr);

// Deterministic scoring of a checkpoint on the given instances.
RunMetrics evaluate_checkpoint(const gnn::CheckpointData& checkpoint, const TaskData& data,
                               const std::vector<std::size_t>& indices);

struct SweepResult {
  std::vector<std::uint64_t> seeds;
  std::vector<RunMetrics> per_seed;
  Aggregate roc_auc, accuracy, macro_f1;
};

SweepResult seed_sweep(const TaskData& data, const gnn::GinModel& backbone,
                       const RunConfig& config, Variant variant,
                       const std::vector<std::uint64_t>& seeds);

}  // namespace leap::train
