#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "leap/dataset.hpp"
#include "leap/rl/algo.hpp"

namespace leap::train {

enum class Variant { kFull, kGpf, kGpfPlus, kNoEcr, kHeadOnly };

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& name);

// Fully-resolved run configuration. Sentinels (-1 / 0 where noted) mean
// "derive the task-specific default"; resolve() replaces them.
struct RunConfig {
  std::string task = "graph";  // graph | node
  std::uint64_t seed = 1;
  std::size_t epochs = 40;
  std::size_t batch_size = 16;

  double lr_policy = 5e-4;
  double lr_head = 5e-3;
  double weight_decay_head = 5e-4;
  double momentum = 0.0;

  std::size_t k = 10;
  double theta = 0.5;
  double lambda_e = 1e-4;
  long h = -1;                 // policy update interval; -1 -> 3 graph / 4 node
  double horizon_frac = -1.0;  // -1 -> N/4 full-shot, N/2 few-shot; 0 -> no edits
  std::size_t shots = 0;       // 0 -> full-shot
  std::size_t patience = 10;

  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip = 0.2;
  double beta_d = 0.01;
  double beta_c = 0.01;
  double sigma = 0.1;
  double critic_weight = 1.0;
  std::size_t ppo_minibatch = 64;
  std::size_t policy_hidden = 32;

  long gin_layers = -1;  // -1 -> 3 graph / 2 node
  std::size_t gin_hidden = 32;
  double gin_init_scale = 0.2;
  double dropout = 0.5;
  std::string readout = "sum";  // sum | mean
  std::size_t head_layers = 2;
  std::size_t head_hidden = 32;
  std::size_t hops = 2;

  GeneratorSpec gen;

  std::size_t pretrain_epochs = 30;
  double pretrain_lr = 0.01;

  std::string out_dir = "out";
  std::string data_dir;   // load dataset from manifest when set
  std::string backbone;   // pretrained backbone checkpoint path
  std::string variant = "full";
  bool dump_trajectories = false;

  void resolve();  // replace sentinels, then validate
  rl::RlConfig rl_config() const;
  // Deterministic (sorted) key/value echo of the resolved config.
  std::vector<std::pair<std::string, std::string>> echo() const;
};

// key = value lines, '#' comments; unknown keys are rejected by name.
std::map<std::string, std::string> read_config_file(const std::string& path);
void apply_override(std::map<std::string, std::string>& kv, const std::string& assignment);
RunConfig config_from_map(const std::map<std::string, std::string>& kv);

}  // namespace leap::train
