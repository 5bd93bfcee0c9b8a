#include "leap/rl/policy.hpp"

#include <cmath>
#include <string>

#include "leap/errors.hpp"
#include "leap/prompt.hpp"

namespace leap::rl {

namespace {
constexpr double kLogTwoPi = 1.8378770664093454835606594728112;
}

PolicyBundle PolicyBundle::make(std::size_t state_dim, std::size_t prompt_dim,
                                std::size_t hidden, std::size_t max_nodes, double sigma,
                                Rng& rng) {
  if (sigma < 0.0) throw ConfigError("policy: sigma must be non-negative");
  if (max_nodes == 0) throw ConfigError("policy: max_nodes must be positive");
  PolicyBundle b;
  b.discrete_enc = ad::Mlp::make({state_dim, hidden, 1}, rng, "actor_d");
  b.continuous_enc = ad::Mlp::make({state_dim, hidden, prompt_dim}, rng, "actor_c");
  b.critic_enc = ad::Mlp::make({max_nodes * state_dim, hidden, 1}, rng, "critic");
  b.sigma = sigma;
  b.max_nodes = max_nodes;
  return b;
}

std::vector<ad::Parameter*> PolicyBundle::actor_params() {
  std::vector<ad::Parameter*> out = discrete_enc.params();
  for (ad::Parameter* p : continuous_enc.params()) out.push_back(p);
  return out;
}

std::vector<ad::Parameter*> PolicyBundle::critic_params() { return critic_enc.params(); }

std::vector<ad::Parameter*> PolicyBundle::params() {
  std::vector<ad::Parameter*> out = actor_params();
  for (ad::Parameter* p : critic_params()) out.push_back(p);
  return out;
}

Tensor compute_state(const gnn::GinModel& backbone, const Tensor& features,
                     const Tensor& adjacency, const Tensor& prompts) {
  return gnn::gin_forward(backbone, apply_prompt(features, prompts), adjacency,
                          gnn::Mode::kEval);
}

std::vector<double> discrete_policy(const PolicyBundle& bundle, const Tensor& state) {
  if (state.rows() == 0) throw GraphError("discrete_policy: empty graph");
  const Tensor logits = bundle.discrete_enc.forward(state);  // N x 1
  std::vector<double> probs(logits.rows());
  double mx = logits.at(0, 0);
  for (std::size_t i = 1; i < logits.rows(); ++i) mx = std::max(mx, logits.at(i, 0));
  double denom = 0.0;
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    probs[i] = std::exp(logits.at(i, 0) - mx);
    denom += probs[i];
  }
  for (double& p : probs) p /= denom;
  return probs;
}

std::size_t sample_node(const std::vector<double>& probs, SelectMode mode, Rng* rng) {
  if (probs.empty()) throw GraphError("sample_node: empty distribution");
  if (mode == SelectMode::kGreedy) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < probs.size(); ++i)
      if (probs[i] > probs[best]) best = i;
    return best;
  }
  if (rng == nullptr) throw ConfigError("sample_node: sampling mode needs an rng");
  const double u = rng->uniform();
  double cum = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    cum += probs[i];
    if (u < cum) return i;
  }
  return probs.size() - 1;
}

double gaussian_logpdf(const Tensor& sample, const Tensor& mean, double sigma) {
  if (!sample.same_shape(mean))
    throw ShapeError("gaussian_logpdf: " + sample.shape_str() + " vs " + mean.shape_str());
  if (sigma <= 0.0) throw NumericError("gaussian_logpdf: degenerate density (sigma <= 0)");
  double logp = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double z = (sample[i] - mean[i]) / sigma;
    logp += -0.5 * z * z - std::log(sigma) - 0.5 * kLogTwoPi;
  }
  return logp;
}

ContinuousDraw continuous_policy(const PolicyBundle& bundle, const Tensor& state,
                                 std::size_t node, double sigma, double theta, Rng* rng) {
  if (node >= state.rows())
    throw IndexError("continuous_policy: node " + std::to_string(node) + " out of range");
  if (sigma < 0.0) throw ConfigError("continuous_policy: sigma must be non-negative");
  const Tensor means = bundle.continuous_enc.forward(state);  // N x D
  ContinuousDraw draw;
  draw.action.node = node;
  draw.action.mean = Tensor(1, means.cols());
  for (std::size_t d = 0; d < means.cols(); ++d)
    draw.action.mean.at(0, d) = means.at(node, d);

  draw.sample = draw.action.mean;
  if (sigma > 0.0) {
    if (rng == nullptr) throw ConfigError("continuous_policy: sigma > 0 needs an rng");
    for (std::size_t d = 0; d < draw.sample.cols(); ++d)
      draw.sample.at(0, d) = rng->normal(draw.action.mean.at(0, d), sigma);
    draw.logp = gaussian_logpdf(draw.sample, draw.action.mean, sigma);
  }

  draw.action.delta = draw.sample;
  for (std::size_t d = 0; d < draw.action.delta.cols(); ++d)
    draw.action.delta.at(0, d) = std::clamp(draw.action.delta.at(0, d), -theta, theta);
  return draw;
}

Tensor pad_and_flatten(const Tensor& state, std::size_t max_nodes) {
  if (state.rows() > max_nodes)
    throw ShapeError("critic: state has " + std::to_string(state.rows()) +
                     " nodes, exceeding configured max of " + std::to_string(max_nodes));
  Tensor flat(1, max_nodes * state.cols());
  for (std::size_t i = 0; i < state.rows(); ++i)
    for (std::size_t j = 0; j < state.cols(); ++j)
      flat.at(0, i * state.cols() + j) = state.at(i, j);
  return flat;
}

double critic_value(const PolicyBundle& bundle, const Tensor& state) {
  return bundle.critic_enc.forward(pad_and_flatten(state, bundle.max_nodes)).item();
}

}  // namespace leap::rl
