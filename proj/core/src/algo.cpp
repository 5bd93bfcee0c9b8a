#include "leap/rl/algo.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>

#include "leap/errors.hpp"

namespace leap::rl {

namespace {
constexpr double kLogTwoPi = 1.8378770664093454835606594728112;
constexpr double kTiny = 1e-12;
}  // namespace

void RlConfig::validate() const {
  if (gamma < 0.0 || gamma >= 1.0) throw ConfigError("rl: gamma must be in [0,1)");
  if (gae_lambda < 0.0 || gae_lambda > 1.0) throw ConfigError("rl: gae_lambda must be in [0,1]");
  if (clip <= 0.0) throw ConfigError("rl: clip must be positive");
  if (theta <= 0.0) throw ConfigError("rl: theta must be positive");
  if (sigma < 0.0) throw ConfigError("rl: sigma must be non-negative");
  if (critic_weight <= 0.0) throw ConfigError("rl: critic_weight must be positive");
  if (update_interval < 1) throw ConfigError("rl: update interval h must be >= 1");
  if (minibatch < 1) throw ConfigError("rl: minibatch must be >= 1");
}

double reward(double loss_prev, double loss_curr, double ecr_t, double lambda_e) {
  return lambda_e * ecr_t + loss_prev - loss_curr;
}

std::vector<double> discounted_returns(const std::vector<double>& rewards, double gamma) {
  std::vector<double> returns(rewards.size(), 0.0);
  double acc = 0.0;
  for (std::size_t i = rewards.size(); i-- > 0;) {
    acc = rewards[i] + gamma * acc;
    returns[i] = acc;
  }
  return returns;
}

std::vector<double> gae(const std::vector<double>& rewards,
                        const std::vector<double>& values, double gamma, double lambda) {
  if (values.size() != rewards.size() + 1)
    throw ShapeError("gae: need one value per step plus the terminal bootstrap (got " +
                     std::to_string(values.size()) + " values for " +
                     std::to_string(rewards.size()) + " rewards)");
  std::vector<double> adv(rewards.size(), 0.0);
  double acc = 0.0;
  for (std::size_t i = rewards.size(); i-- > 0;) {
    const double delta = rewards[i] + gamma * values[i + 1] - values[i];
    acc = delta + gamma * lambda * acc;
    adv[i] = acc;
  }
  return adv;
}

double critic_loss(const std::vector<double>& values, const std::vector<double>& returns) {
  if (values.size() != returns.size() || values.empty())
    throw ShapeError("critic_loss: size mismatch or empty input");
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double d = values[i] - returns[i];
    total += d * d;
  }
  return total / static_cast<double>(values.size());
}

namespace {

ad::Val mean_of(ad::Tape& tape, const std::vector<ad::Val>& vals) {
  ad::Val acc = vals[0];
  for (std::size_t i = 1; i < vals.size(); ++i) acc = tape.add(acc, vals[i]);
  return tape.affine(acc, 1.0 / static_cast<double>(vals.size()), 0.0);
}

// min(ratio * A, clip(ratio) * A) for one sample.
ad::Val clipped_term(ad::Tape& tape, ad::Val ratio, double advantage, double clip) {
  const ad::Val lhs = tape.affine(ratio, advantage, 0.0);
  const ad::Val rhs = tape.affine(tape.clamp(ratio, 1.0 - clip, 1.0 + clip), advantage, 0.0);
  return tape.minimum(lhs, rhs);
}

ad::Val ratio_from_logps(ad::Tape& tape, ad::Val logp_new, double logp_old) {
  // The log-ratio is clamped so a pathological sample cannot overflow exp();
  // at |log ratio| = 30 the clipped objective is flat anyway.
  const ad::Val diff = tape.affine(logp_new, 1.0, -logp_old);
  return tape.exp(tape.clamp(diff, -30.0, 30.0));
}

// All batch states stacked row-wise so each encoder runs once per minibatch.
// Row-wise MLPs make the per-sample rows bitwise identical to separate
// forwards.
struct StackedStates {
  ad::Val value;
  std::vector<std::size_t> offset;
  std::vector<std::size_t> rows;
};

StackedStates stack_states(ad::Tape& tape, const std::vector<const Transition*>& batch) {
  StackedStates out;
  std::size_t total = 0;
  for (const Transition* tr : batch) {
    out.offset.push_back(total);
    out.rows.push_back(tr->state.rows());
    total += tr->state.rows();
  }
  Tensor big(total, batch.front()->state.cols());
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const Tensor& s = batch[b]->state;
    for (std::size_t i = 0; i < s.rows(); ++i)
      for (std::size_t j = 0; j < s.cols(); ++j) big.at(out.offset[b] + i, j) = s.at(i, j);
  }
  out.value = tape.constant(std::move(big));
  return out;
}

}  // namespace

ad::Val ppo_objective_discrete(ad::Tape& tape, PolicyBundle& bundle,
                               const std::vector<const Transition*>& batch,
                               const std::vector<double>& advantages, double clip,
                               double beta_d) {
  if (batch.empty() || batch.size() != advantages.size())
    throw ShapeError("ppo_objective_discrete: empty batch or advantage size mismatch");
  const StackedStates st = stack_states(tape, batch);
  const ad::Val logits_all = bundle.discrete_enc.forward(tape, st.value);  // (sum N) x 1
  std::vector<ad::Val> terms, entropies;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const Transition& tr = *batch[b];
    const ad::Val logits = tape.slice_rows(logits_all, st.offset[b], st.rows[b]);
    const ad::Val probs = tape.row_softmax(tape.transpose(logits));  // 1 x N
    const ad::Val safe = tape.clamp(probs, kTiny, 2.0);
    const ad::Val logp_new = tape.log(tape.pick(safe, tr.action.node));
    const ad::Val ratio = ratio_from_logps(tape, logp_new, tr.logp_discrete);
    terms.push_back(clipped_term(tape, ratio, advantages[b], clip));
    const ad::Val plogp = tape.mul(probs, tape.log(safe));
    entropies.push_back(tape.affine(tape.sum(plogp), -1.0, 0.0));
  }
  return tape.add(mean_of(tape, terms), tape.affine(mean_of(tape, entropies), beta_d, 0.0));
}

ad::Val ppo_objective_continuous(ad::Tape& tape, PolicyBundle& bundle,
                                 const std::vector<const Transition*>& batch,
                                 const std::vector<double>& advantages, double clip,
                                 double beta_c) {
  if (batch.empty() || batch.size() != advantages.size())
    throw ShapeError("ppo_objective_continuous: empty batch or advantage size mismatch");
  const double sigma = bundle.sigma;
  if (sigma <= 0.0)
    throw NumericError("ppo_objective_continuous: degenerate density, sigma must be > 0");
  const double dim_d = static_cast<double>(bundle.continuous_enc.out_dim());
  const double log_norm = -dim_d * (std::log(sigma) + 0.5 * kLogTwoPi);
  const StackedStates st = stack_states(tape, batch);
  const ad::Val means_all = bundle.continuous_enc.forward(tape, st.value);  // (sum N) x D
  std::vector<ad::Val> terms;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const Transition& tr = *batch[b];
    const ad::Val mean_row = tape.pick_row(means_all, st.offset[b] + tr.action.node);
    const ad::Val diff = tape.sub(tape.constant(tr.sample), mean_row);
    const ad::Val quad = tape.sum(tape.mul(diff, diff));
    const ad::Val logp_new = tape.affine(quad, -0.5 / (sigma * sigma), log_norm);
    const ad::Val ratio = ratio_from_logps(tape, logp_new, tr.logp_continuous);
    terms.push_back(clipped_term(tape, ratio, advantages[b], clip));
  }
  // Diagonal Gaussian differential entropy is constant in the mean.
  const double entropy = dim_d * (0.5 * (1.0 + kLogTwoPi) + std::log(sigma));
  return tape.affine(mean_of(tape, terms), 1.0, beta_c * entropy);
}

ad::Val critic_loss_tape(ad::Tape& tape, PolicyBundle& bundle,
                         const std::vector<const Transition*>& batch,
                         const std::vector<double>& returns) {
  if (batch.empty() || batch.size() != returns.size())
    throw ShapeError("critic_loss_tape: empty batch or returns size mismatch");
  Tensor padded(batch.size(), bundle.max_nodes * batch.front()->state.cols());
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const Tensor flat = pad_and_flatten(batch[b]->state, bundle.max_nodes);
    for (std::size_t j = 0; j < flat.cols(); ++j) padded.at(b, j) = flat.at(0, j);
  }
  const ad::Val values = bundle.critic_enc.forward(tape, tape.constant(std::move(padded)));
  Tensor target(returns.size(), 1);
  for (std::size_t i = 0; i < returns.size(); ++i) target.at(i, 0) = returns[i];
  return tape.mse(values, tape.constant(target));
}

double ppo_loss_discrete(PolicyBundle& bundle, const std::vector<const Transition*>& batch,
                         const std::vector<double>& advantages, double clip, double beta_d) {
  ad::Tape tape;
  return tape.value(ppo_objective_discrete(tape, bundle, batch, advantages, clip, beta_d))
      .item();
}

double ppo_loss_continuous(PolicyBundle& bundle,
                           const std::vector<const Transition*>& batch,
                           const std::vector<double>& advantages, double clip,
                           double beta_c) {
  ad::Tape tape;
  return tape
      .value(ppo_objective_continuous(tape, bundle, batch, advantages, clip, beta_c))
      .item();
}

UpdateStats update_policies(const std::vector<Episode>& episodes, PolicyBundle& bundle,
                            const RlConfig& config, ad::Sgd& optimizer, Rng& rng) {
  config.validate();
  UpdateStats stats;

  std::vector<const Transition*> all;
  std::vector<double> advantages, returns;
  for (const Episode& ep : episodes) {
    if (ep.empty()) continue;
    std::vector<double> rewards, values;
    for (const Transition& tr : ep) {
      rewards.push_back(tr.reward);
      values.push_back(tr.value);
    }
    values.push_back(0.0);  // terminal bootstrap at the horizon
    const auto ep_adv = gae(rewards, values, config.gamma, config.gae_lambda);
    const auto ep_ret = discounted_returns(rewards, config.gamma);
    for (std::size_t t = 0; t < ep.size(); ++t) {
      all.push_back(&ep[t]);
      advantages.push_back(ep_adv[t]);
      returns.push_back(ep_ret[t]);
    }
  }

  if (all.empty()) {
    std::fprintf(stderr, "warning: update_policies called with an empty trajectory buffer\n");
    stats.skipped = true;
    return stats;
  }
  if (bundle.sigma <= 0.0)
    throw NumericError("update_policies: degenerate density, sigma must be > 0");

  stats.transitions = all.size();
  const double n = static_cast<double>(advantages.size());
  double mean = std::accumulate(advantages.begin(), advantages.end(), 0.0) / n;
  stats.mean_advantage_raw = mean;
  double var = 0.0;
  for (double a : advantages) var += (a - mean) * (a - mean);
  const double sd = std::sqrt(var / n);
  for (double& a : advantages) a = (a - mean) / (sd + 1e-8);

  std::vector<std::size_t> order(all.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);

  double critic_total = 0.0;
  std::size_t batches = 0;
  for (std::size_t start = 0; start < order.size(); start += config.minibatch) {
    const std::size_t stop = std::min(order.size(), start + config.minibatch);
    std::vector<const Transition*> batch;
    std::vector<double> batch_adv, batch_ret;
    for (std::size_t i = start; i < stop; ++i) {
      batch.push_back(all[order[i]]);
      batch_adv.push_back(advantages[order[i]]);
      batch_ret.push_back(returns[order[i]]);
    }
    ad::Tape tape;
    const ad::Val j_d = ppo_objective_discrete(tape, bundle, batch, batch_adv, config.clip,
                                               config.beta_d);
    const ad::Val j_c = ppo_objective_continuous(tape, bundle, batch, batch_adv, config.clip,
                                                 config.beta_c);
    const ad::Val l_critic = critic_loss_tape(tape, bundle, batch, batch_ret);
    critic_total += tape.value(l_critic).item();
    ++batches;
    // Ascend on both surrogate objectives, descend on the weighted critic MSE.
    const ad::Val total =
        tape.add(tape.add(tape.affine(j_d, -1.0, 0.0), tape.affine(j_c, -1.0, 0.0)),
                 tape.affine(l_critic, config.critic_weight, 0.0));
    tape.backward(total);
    optimizer.step(bundle.params());
  }
  stats.critic_mse = critic_total / static_cast<double>(batches);
  return stats;
}

}  // namespace leap::rl
