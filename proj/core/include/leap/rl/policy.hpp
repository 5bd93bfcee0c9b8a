#pragma once

#include <cstdint>
#include <vector>

#include "leap/ad/mlp.hpp"
#include "leap/gnn/gin.hpp"
#include "leap/rng.hpp"
#include "leap/tensor.hpp"

namespace leap::rl {

// Discrete actor (which node), continuous actor (what edit), shared critic.
// sigma is the predefined standard deviation of the continuous head; the
// trainer forces it to 0 for deterministic replay.
struct PolicyBundle {
  ad::Mlp discrete_enc;    // per-node: H -> hidden -> 1 logit
  ad::Mlp continuous_enc;  // per-node: H -> hidden -> D mean
  ad::Mlp critic_enc;      // flattened state: max_nodes*H -> hidden -> 1
  double sigma = 0.1;
  std::size_t max_nodes = 0;  // zero-padding width for the critic input

  static PolicyBundle make(std::size_t state_dim, std::size_t prompt_dim,
                           std::size_t hidden, std::size_t max_nodes, double sigma,
                           Rng& rng);

  std::vector<ad::Parameter*> actor_params();
  std::vector<ad::Parameter*> critic_params();
  std::vector<ad::Parameter*> params();
};

// State features: frozen backbone forward on the prompted features, eval mode.
Tensor compute_state(const gnn::GinModel& backbone, const Tensor& features,
                     const Tensor& adjacency, const Tensor& prompts);

// Softmax over per-node logits.
std::vector<double> discrete_policy(const PolicyBundle& bundle, const Tensor& state);

enum class SelectMode { kGreedy, kSample };

// Greedy: argmax with ties broken toward the lowest index. Sample:
// categorical draw (rng required).
std::size_t sample_node(const std::vector<double>& probs, SelectMode mode,
                        Rng* rng = nullptr);

struct HybridAction {
  std::size_t node = 0;
  Tensor mean;   // 1 x D encoder output z
  Tensor delta;  // 1 x D clamped edit f_a
};

struct ContinuousDraw {
  HybridAction action;
  Tensor sample;  // pre-clamp Gaussian sample, used for the stored log-prob
  double logp = 0.0;
};

// z = encoder(state)[node]; delta = clamp(Normal(z, sigma), -theta, theta).
// sigma == 0 skips the draw entirely (delta = clamp(z)) and reports logp 0.
ContinuousDraw continuous_policy(const PolicyBundle& bundle, const Tensor& state,
                                 std::size_t node, double sigma, double theta,
                                 Rng* rng = nullptr);

// Diagonal Gaussian log-density of `sample` around `mean`.
double gaussian_logpdf(const Tensor& sample, const Tensor& mean, double sigma);

// Zero-pad the state to max_nodes rows and flatten to 1 x (max_nodes * H).
Tensor pad_and_flatten(const Tensor& state, std::size_t max_nodes);

double critic_value(const PolicyBundle& bundle, const Tensor& state);

}  // namespace leap::rl
