#pragma once

#include <cstdint>
#include <vector>

#include "leap/ad/optim.hpp"
#include "leap/ad/tape.hpp"
#include "leap/rl/policy.hpp"

namespace leap::rl {

struct RlConfig {
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip = 0.2;
  double beta_d = 0.01;
  double beta_c = 0.01;
  double theta = 0.5;         // prompt edit range
  double lambda_e = 1e-4;     // ECR weight in the reward
  double sigma = 0.1;
  double critic_weight = 1.0;  // weight of the critic MSE in the update step
  std::size_t update_interval = 3;  // h
  std::size_t minibatch = 64;

  void validate() const;
};

struct Transition {
  Tensor state;  // N x H
  HybridAction action;
  Tensor sample;  // pre-clamp continuous sample
  double logp_discrete = 0.0;
  double logp_continuous = 0.0;
  double reward = 0.0;
  double value = 0.0;
};

using Episode = std::vector<Transition>;

// r = lambda_e * ecr + (loss under previous prompts - loss under new prompts).
double reward(double loss_prev, double loss_curr, double ecr_t, double lambda_e);

// R^t = sum_{l>=0} gamma^l r^{t+l} within the finite horizon.
std::vector<double> discounted_returns(const std::vector<double>& rewards, double gamma);

// A^t = sum_l (gamma*lambda)^l delta^{t+l}, delta^t = r^t + gamma V^{t+1} - V^t.
// values has one more entry than rewards; the trailing entry is the terminal
// bootstrap (0 at the episode horizon).
std::vector<double> gae(const std::vector<double>& rewards,
                        const std::vector<double>& values, double gamma, double lambda);

// (1/T) sum (V - R)^2.
double critic_loss(const std::vector<double>& values, const std::vector<double>& returns);

// Clipped PPO objectives (to be maximized). The tape variants re-run the
// encoders on the stored states so gradients reach the actor parameters; the
// plain variants report the objective value for the current parameters.
ad::Val ppo_objective_discrete(ad::Tape& tape, PolicyBundle& bundle,
                               const std::vector<const Transition*>& batch,
                               const std::vector<double>& advantages, double clip,
                               double beta_d);
ad::Val ppo_objective_continuous(ad::Tape& tape, PolicyBundle& bundle,
                                 const std::vector<const Transition*>& batch,
                                 const std::vector<double>& advantages, double clip,
                                 double beta_c);
ad::Val critic_loss_tape(ad::Tape& tape, PolicyBundle& bundle,
                         const std::vector<const Transition*>& batch,
                         const std::vector<double>& returns);

double ppo_loss_discrete(PolicyBundle& bundle, const std::vector<const Transition*>& batch,
                         const std::vector<double>& advantages, double clip, double beta_d);
double ppo_loss_continuous(PolicyBundle& bundle,
                           const std::vector<const Transition*>& batch,
                           const std::vector<double>& advantages, double clip,
                           double beta_c);

struct UpdateStats {
  bool skipped = false;
  std::size_t transitions = 0;
  double mean_advantage_raw = 0.0;
  double critic_mse = 0.0;
};

// One PPO epoch over the collected episodes: per-episode GAE advantages
// (terminal bootstrap 0), batch-standardized, then minibatch ascent on both
// actor objectives and descent on the critic MSE. Empty buffer is a warning
// no-op. Requires sigma > 0.
UpdateStats update_policies(const std::vector<Episode>& episodes, PolicyBundle& bundle,
                            const RlConfig& config, ad::Sgd& optimizer, Rng& rng);

}  // namespace leap::rl
