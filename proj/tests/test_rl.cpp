#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "leap/ad/grad_check.hpp"
#include "leap/errors.hpp"
#include "leap/gnn/gin.hpp"
#include "leap/graph.hpp"
#include "leap/prompt.hpp"
#include "leap/rl/algo.hpp"
#include "leap/rl/policy.hpp"
#include "leap/rng.hpp"

using namespace leap;

namespace {

Tensor random_tensor(std::size_t r, std::size_t c, Rng& rng) {
  Tensor t(r, c);
  for (double& v : t.data()) v = rng.normal();
  return t;
}

Graph random_graph(std::size_t n, std::size_t d, double p, Rng& rng) {
  Tensor adj(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (rng.bernoulli(p)) {
        adj.at(i, j) = 1.0;
        adj.at(j, i) = 1.0;
      }
  return make_graph(std::move(adj), random_tensor(n, d, rng));
}

rl::PolicyBundle make_bundle(std::size_t h, std::size_t d, std::size_t max_n, double sigma,
                             std::uint64_t seed) {
  Rng rng(seed);
  return rl::PolicyBundle::make(h, d, 8, max_n, sigma, rng);
}

rl::Transition make_transition(const rl::PolicyBundle& bundle, const Tensor& state,
                               double sigma, double theta, Rng& rng) {
  const auto probs = rl::discrete_policy(bundle, state);
  const std::size_t node = rl::sample_node(probs, rl::SelectMode::kSample, &rng);
  auto draw = rl::continuous_policy(bundle, state, node, sigma, theta, &rng);
  rl::Transition tr;
  tr.state = state;
  tr.action = draw.action;
  tr.sample = draw.sample;
  tr.logp_discrete = std::log(probs[node]);
  tr.logp_continuous = draw.logp;
  tr.reward = 0.0;
  tr.value = 0.0;
  return tr;
}

}  // namespace

TEST_CASE("compute_state: zero prompt, determinism, composition oracle") {
  Rng rng(1);
  Graph g = random_graph(6, 3, 0.5, rng);
  gnn::GinConfig cfg;
  cfg.layers = 2;
  cfg.hidden = 8;
  gnn::GinModel backbone = gnn::GinModel::make(3, cfg, rng);

  const Tensor zero(6, 3);
  const Tensor s0 = rl::compute_state(backbone, g.features, g.adjacency, zero);
  CHECK(s0 == gnn::gin_forward(backbone, g.features, g.adjacency, gnn::Mode::kEval));

  Tensor p = random_tensor(6, 3, rng);
  const Tensor s1 = rl::compute_state(backbone, g.features, g.adjacency, p);
  CHECK(s1 == rl::compute_state(backbone, g.features, g.adjacency, p));
  const Tensor oracle =
      gnn::gin_forward(backbone, apply_prompt(g.features, p), g.adjacency, gnn::Mode::kEval);
  CHECK(s1 == oracle);
}

TEST_CASE("discrete_policy: symmetry, dominance, normalization, tie-break") {
  auto bundle = make_bundle(4, 3, 8, 0.1, 2);
  // identical node states -> uniform probabilities, greedy picks index 0
  Tensor state(5, 4);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 4; ++j) state.at(i, j) = 0.7;
  auto probs = rl::discrete_policy(bundle, state);
  for (double p : probs) CHECK(p == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(rl::sample_node(probs, rl::SelectMode::kGreedy) == 0);

  Rng rng(3);
  Tensor random_state = random_tensor(7, 4, rng);
  auto pr = rl::discrete_policy(bundle, random_state);
  double total = 0.0;
  for (double p : pr) total += p;
  CHECK(std::fabs(total - 1.0) <= 1e-12);

  CHECK_THROWS_AS(rl::discrete_policy(bundle, Tensor(0, 4)), GraphError);
}

TEST_CASE("sample_node: dominant probability wins in both modes") {
  std::vector<double> probs{0.002, 0.99, 0.008};
  CHECK(rl::sample_node(probs, rl::SelectMode::kGreedy) == 1);
  Rng rng(5);
  std::size_t hits = 0;
  for (int i = 0; i < 1000; ++i)
    hits += rl::sample_node(probs, rl::SelectMode::kSample, &rng) == 1 ? 1 : 0;
  CHECK(hits > 970);
  CHECK_THROWS_AS(rl::sample_node(probs, rl::SelectMode::kSample, nullptr), ConfigError);
}

TEST_CASE("continuous_policy: sigma 0 passthrough and clamping") {
  auto bundle = make_bundle(4, 3, 8, 0.0, 7);
  Rng rng(11);
  Tensor state = random_tensor(5, 4, rng);
  const Tensor means = bundle.continuous_enc.forward(state);

  // theta large: delta equals the encoder row exactly
  auto draw = rl::continuous_policy(bundle, state, 2, 0.0, 1e9);
  for (std::size_t d = 0; d < 3; ++d)
    CHECK(draw.action.delta.at(0, d) == means.at(2, d));
  CHECK(draw.logp == 0.0);

  // theta below |z|: entries clamp to the boundary
  double m = 0.0;
  for (std::size_t d = 0; d < 3; ++d) m = std::max(m, std::fabs(means.at(2, d)));
  REQUIRE(m > 0.0);
  auto clamped = rl::continuous_policy(bundle, state, 2, 0.0, m / 2.0);
  for (std::size_t d = 0; d < 3; ++d) {
    CHECK(std::fabs(clamped.action.delta.at(0, d)) <= m / 2.0);
    if (std::fabs(means.at(2, d)) > m / 2.0)
      CHECK(std::fabs(clamped.action.delta.at(0, d)) == doctest::Approx(m / 2.0));
  }
  CHECK_THROWS_AS(rl::continuous_policy(bundle, state, 9, 0.0, 1.0), IndexError);
}

TEST_CASE("continuous_policy: reproducible sampling with Monte Carlo mean") {
  auto bundle = make_bundle(4, 3, 8, 0.1, 13);
  Rng rng(17);
  Tensor state = random_tensor(6, 4, rng);
  const Tensor means = bundle.continuous_enc.forward(state);

  Rng s1(99), s2(99);
  auto a = rl::continuous_policy(bundle, state, 1, 0.1, 1e9, &s1);
  auto b = rl::continuous_policy(bundle, state, 1, 0.1, 1e9, &s2);
  CHECK(a.sample == b.sample);

  const int n = 10000;
  Tensor mean_acc(1, 3);
  Rng mc(123);
  for (int i = 0; i < n; ++i) {
    auto draw = rl::continuous_policy(bundle, state, 1, 0.1, 1e9, &mc);
    for (std::size_t d = 0; d < 3; ++d) mean_acc.at(0, d) += draw.sample.at(0, d);
  }
  const double se = 0.1 / std::sqrt(static_cast<double>(n));
  for (std::size_t d = 0; d < 3; ++d) {
    const double emp = mean_acc.at(0, d) / n;
    CHECK(std::fabs(emp - means.at(1, d)) <= 3.0 * se);
  }
}

TEST_CASE("reward: direct formula and telescoping") {
  CHECK(rl::reward(0.4, 0.4, 0.9, 0.0) == 0.0);
  CHECK(rl::reward(0.5, 0.3, 0.5, 1e-4) == doctest::Approx(0.2 + 5e-5).epsilon(1e-15));

  Rng rng(19);
  std::vector<double> losses;
  for (int t = 0; t <= 12; ++t) losses.push_back(rng.uniform(0.0, 2.0));
  double total = 0.0;
  for (int t = 1; t <= 12; ++t)
    total += rl::reward(losses[t - 1], losses[t], rng.uniform(), 0.0);
  CHECK(std::fabs(total - (losses.front() - losses.back())) <= 1e-10);
}

TEST_CASE("discounted_returns: trivial cases and exact double-loop oracle") {
  CHECK(rl::discounted_returns({0.3, -0.7, 2.0}, 0.0) == std::vector<double>{0.3, -0.7, 2.0});
  const auto geo = rl::discounted_returns({1.0, 1.0, 1.0}, 0.5);
  CHECK(geo[0] == doctest::Approx(1.75).epsilon(1e-15));
  CHECK(geo[1] == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(geo[2] == doctest::Approx(1.0).epsilon(1e-15));

  Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t t_len = 1 + rng.uniform_index(16);
    std::vector<double> rewards;
    for (std::size_t t = 0; t < t_len; ++t) rewards.push_back(rng.normal());
    const double gamma = rng.uniform(0.0, 0.999);
    const auto fast = rl::discounted_returns(rewards, gamma);
    for (std::size_t t = 0; t < t_len; ++t) {
      double oracle = 0.0;
      for (std::size_t l = 0; t + l < t_len; ++l)
        oracle += std::pow(gamma, static_cast<double>(l)) * rewards[t + l];
      CHECK(std::fabs(fast[t] - oracle) <= 1e-10);
    }
  }
}

TEST_CASE("gae: single step, gamma 0, double-loop oracle") {
  // one step: A = r + gamma V(s1) - V(s0)
  const auto one = rl::gae({0.5}, {1.0, 2.0}, 0.9, 0.95);
  CHECK(one[0] == doctest::Approx(0.5 + 0.9 * 2.0 - 1.0).epsilon(1e-15));

  const auto g0 = rl::gae({0.5, -0.2}, {0.3, 0.1, 0.0}, 0.0, 0.7);
  CHECK(g0[0] == doctest::Approx(0.5 - 0.3).epsilon(1e-15));
  CHECK(g0[1] == doctest::Approx(-0.2 - 0.1).epsilon(1e-15));

  Rng rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t t_len = 1 + rng.uniform_index(16);
    std::vector<double> rewards, values;
    for (std::size_t t = 0; t < t_len; ++t) rewards.push_back(rng.normal());
    for (std::size_t t = 0; t <= t_len; ++t) values.push_back(rng.normal());
    const double gamma = rng.uniform(0.0, 0.999), lambda = rng.uniform(0.0, 1.0);
    const auto fast = rl::gae(rewards, values, gamma, lambda);
    for (std::size_t t = 0; t < t_len; ++t) {
      double oracle = 0.0;
      for (std::size_t l = 0; t + l < t_len; ++l) {
        const double delta =
            rewards[t + l] + gamma * values[t + l + 1] - values[t + l];
        oracle += std::pow(gamma * lambda, static_cast<double>(l)) * delta;
      }
      CHECK(std::fabs(fast[t] - oracle) <= 1e-10);
    }
  }
  CHECK_THROWS_AS(rl::gae({1.0}, {1.0}, 0.9, 0.9), ShapeError);
}

TEST_CASE("critic_loss: trivial values and mean-of-squares oracle") {
  CHECK(rl::critic_loss({1.0, 2.0}, {1.0, 2.0}) == 0.0);
  CHECK(rl::critic_loss({1.0, 2.0, 3.0}, {0.0, 1.0, 2.0}) == doctest::Approx(1.0));
  Rng rng(31);
  std::vector<double> v, r;
  for (int i = 0; i < 17; ++i) {
    v.push_back(rng.normal());
    r.push_back(rng.normal());
  }
  double oracle = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) oracle += (v[i] - r[i]) * (v[i] - r[i]);
  oracle /= static_cast<double>(v.size());
  CHECK(rl::critic_loss(v, r) == doctest::Approx(oracle).epsilon(1e-15));
}

TEST_CASE("ppo discrete: new = old gives mean advantage plus entropy bonus") {
  auto bundle = make_bundle(4, 3, 8, 0.1, 37);
  Rng rng(41);
  std::vector<rl::Transition> storage;
  std::vector<const rl::Transition*> batch;
  std::vector<double> advantages;
  double entropy_oracle = 0.0;
  for (int b = 0; b < 6; ++b) {
    Tensor state = random_tensor(5, 4, rng);
    storage.push_back(make_transition(bundle, state, 0.1, 1e9, rng));
    advantages.push_back(rng.normal());
    const auto probs = rl::discrete_policy(bundle, state);
    for (double p : probs) entropy_oracle -= p * std::log(p);
  }
  entropy_oracle /= 6.0;
  for (const auto& tr : storage) batch.push_back(&tr);
  double mean_adv = 0.0;
  for (double a : advantages) mean_adv += a;
  mean_adv /= 6.0;

  const double beta_d = 0.01;
  const double obj = rl::ppo_loss_discrete(bundle, batch, advantages, 0.2, beta_d);
  CHECK(obj == doctest::Approx(mean_adv + beta_d * entropy_oracle).epsilon(1e-10));
}

TEST_CASE("ppo discrete: clip arithmetic and plateau property") {
  auto bundle = make_bundle(4, 3, 8, 0.1, 43);
  Rng rng(47);
  Tensor state = random_tensor(6, 4, rng);
  rl::Transition tr = make_transition(bundle, state, 0.1, 1e9, rng);
  const double eps = 0.2;

  // kappa = 1.5, A = 1 -> min(1.5, 1.2) = 1.2
  rl::Transition shifted = tr;
  shifted.logp_discrete = tr.logp_discrete - std::log(1.5);
  const double obj =
      rl::ppo_loss_discrete(bundle, {&shifted}, {1.0}, eps, 0.0);
  CHECK(obj == doctest::Approx(1.2).epsilon(1e-12));

  // plateau for A > 0: constant in kappa beyond 1 + eps
  rl::Transition at_edge = tr, beyond = tr;
  at_edge.logp_discrete = tr.logp_discrete - std::log(1.0 + eps);
  beyond.logp_discrete = tr.logp_discrete - std::log(1.0 + 2.0 * eps);
  const double edge_obj = rl::ppo_loss_discrete(bundle, {&at_edge}, {1.0}, eps, 0.0);
  const double beyond_obj = rl::ppo_loss_discrete(bundle, {&beyond}, {1.0}, eps, 0.0);
  CHECK(std::fabs(edge_obj - beyond_obj) <= 1e-12);

  // plateau for A < 0: constant in kappa below 1 - eps
  rl::Transition low_edge = tr, low_beyond = tr;
  low_edge.logp_discrete = tr.logp_discrete - std::log(1.0 - eps);
  low_beyond.logp_discrete = tr.logp_discrete - std::log(1.0 - 2.0 * eps);
  const double lo1 = rl::ppo_loss_discrete(bundle, {&low_edge}, {-1.0}, eps, 0.0);
  const double lo2 = rl::ppo_loss_discrete(bundle, {&low_beyond}, {-1.0}, eps, 0.0);
  CHECK(std::fabs(lo1 - lo2) <= 1e-12);
}

TEST_CASE("ppo discrete: random batch matches per-sample brute-force oracle") {
  auto bundle = make_bundle(4, 3, 8, 0.1, 53);
  Rng rng(59);
  std::vector<rl::Transition> storage;
  std::vector<double> advantages;
  for (int b = 0; b < 10; ++b) {
    Tensor state = random_tensor(4 + rng.uniform_index(4), 4, rng);
    rl::Transition tr = make_transition(bundle, state, 0.1, 1e9, rng);
    tr.logp_discrete += rng.normal() * 0.3;  // random old policy offset
    storage.push_back(std::move(tr));
    advantages.push_back(rng.normal());
  }
  std::vector<const rl::Transition*> batch;
  for (const auto& tr : storage) batch.push_back(&tr);

  const double eps = 0.2, beta_d = 0.01;
  double oracle = 0.0, entropy = 0.0;
  for (std::size_t b = 0; b < storage.size(); ++b) {
    const auto probs = rl::discrete_policy(bundle, storage[b].state);
    const double logp_new = std::log(probs[storage[b].action.node]);
    const double kappa = std::exp(logp_new - storage[b].logp_discrete);
    const double clipped = std::clamp(kappa, 1.0 - eps, 1.0 + eps);
    oracle += std::min(kappa * advantages[b], clipped * advantages[b]);
    for (double p : probs) entropy -= p * std::log(p);
  }
  oracle /= static_cast<double>(storage.size());
  entropy /= static_cast<double>(storage.size());
  const double obj = rl::ppo_loss_discrete(bundle, batch, advantages, eps, beta_d);
  CHECK(obj == doctest::Approx(oracle + beta_d * entropy).epsilon(1e-12));
}

TEST_CASE("ppo continuous: new = old, zero advantages, density oracle, sigma 0 error") {
  auto bundle = make_bundle(4, 3, 8, 0.1, 61);
  Rng rng(67);
  std::vector<rl::Transition> storage;
  std::vector<double> advantages;
  for (int b = 0; b < 5; ++b) {
    Tensor state = random_tensor(5, 4, rng);
    storage.push_back(make_transition(bundle, state, 0.1, 1e9, rng));
    advantages.push_back(rng.normal());
  }
  std::vector<const rl::Transition*> batch;
  for (const auto& tr : storage) batch.push_back(&tr);

  // stored log-density matches the closed form
  for (const auto& tr : storage) {
    const Tensor means = bundle.continuous_enc.forward(tr.state);
    double oracle = 0.0;
    for (std::size_t d = 0; d < 3; ++d) {
      const double z = (tr.sample.at(0, d) - means.at(tr.action.node, d)) / 0.1;
      oracle += -0.5 * z * z - std::log(0.1) - 0.5 * std::log(2.0 * 3.14159265358979323846);
    }
    CHECK(tr.logp_continuous == doctest::Approx(oracle).epsilon(1e-12));
  }

  const double dim = 3.0;
  const double entropy =
      dim * (0.5 * (1.0 + std::log(2.0 * 3.14159265358979323846)) + std::log(0.1));
  double mean_adv = 0.0;
  for (double a : advantages) mean_adv += a;
  mean_adv /= static_cast<double>(advantages.size());
  const double beta_c = 0.01;
  const double obj = rl::ppo_loss_continuous(bundle, batch, advantages, 0.2, beta_c);
  CHECK(obj == doctest::Approx(mean_adv + beta_c * entropy).epsilon(1e-10));

  const double zero_adv_obj = rl::ppo_loss_continuous(
      bundle, batch, std::vector<double>(batch.size(), 0.0), 0.2, beta_c);
  CHECK(zero_adv_obj == doctest::Approx(beta_c * entropy).epsilon(1e-12));

  bundle.sigma = 0.0;
  CHECK_THROWS_AS(rl::ppo_loss_continuous(bundle, batch, advantages, 0.2, beta_c),
                  NumericError);
}

TEST_CASE("update_policies: zero advantages and zero entropy leave actors unchanged") {
  auto bundle = make_bundle(4, 3, 8, 0.1, 71);
  Rng rng(73);
  rl::Episode episode;
  for (int t = 0; t < 4; ++t) {
    Tensor state = random_tensor(6, 4, rng);
    rl::Transition tr = make_transition(bundle, state, 0.1, 1e9, rng);
    tr.reward = 0.0;
    tr.value = 0.0;  // GAE deltas vanish -> advantages all zero
    episode.push_back(std::move(tr));
  }
  std::vector<Tensor> actor_before;
  for (ad::Parameter* p : bundle.actor_params()) actor_before.push_back(p->value);
  Tensor critic_before = bundle.critic_enc.weights[0].value;

  rl::RlConfig cfg;
  cfg.beta_d = 0.0;
  cfg.beta_c = 0.0;
  ad::Sgd opt(1e-2);
  Rng urng(79);
  auto stats = rl::update_policies({episode}, bundle, cfg, opt, urng);
  CHECK(!stats.skipped);
  CHECK(stats.transitions == 4);

  std::size_t i = 0;
  for (ad::Parameter* p : bundle.actor_params()) CHECK(p->value == actor_before[i++]);
  // critic does move (values are nonzero functions fit to zero returns)
  CHECK(!(bundle.critic_enc.weights[0].value == critic_before));
}

TEST_CASE("update_policies: empty buffer is a no-op warning") {
  auto bundle = make_bundle(4, 3, 8, 0.1, 83);
  rl::RlConfig cfg;
  ad::Sgd opt(1e-2);
  Rng rng(1);
  auto stats = rl::update_policies({}, bundle, cfg, opt, rng);
  CHECK(stats.skipped);
}

TEST_CASE("update_policies: sigma 0 raises degenerate-density error") {
  auto bundle = make_bundle(4, 3, 8, 0.1, 89);
  Rng rng(97);
  rl::Episode ep{make_transition(bundle, random_tensor(5, 4, rng), 0.1, 1e9, rng)};
  bundle.sigma = 0.0;
  rl::RlConfig cfg;
  ad::Sgd opt(1e-2);
  CHECK_THROWS_AS(rl::update_policies({ep}, bundle, cfg, opt, rng), NumericError);
}

TEST_CASE("surrogate gradients match finite differences on a single transition") {
  auto bundle = make_bundle(4, 3, 8, 0.1, 101);
  Rng rng(103);
  Tensor state = random_tensor(6, 4, rng);
  rl::Transition tr = make_transition(bundle, state, 0.1, 1e9, rng);
  tr.reward = 0.4;
  tr.value = 0.1;
  std::vector<const rl::Transition*> batch{&tr};

  auto build_d = [&](ad::Tape& tape) {
    return rl::ppo_objective_discrete(tape, bundle, batch, {0.7}, 0.2, 0.01);
  };
  CHECK(ad::grad_check(build_d, bundle.discrete_enc.params(), 1e-5) <= 1e-4);

  auto build_c = [&](ad::Tape& tape) {
    return rl::ppo_objective_continuous(tape, bundle, batch, {0.7}, 0.2, 0.01);
  };
  CHECK(ad::grad_check(build_c, bundle.continuous_enc.params(), 1e-5) <= 1e-4);

  auto build_v = [&](ad::Tape& tape) {
    return rl::critic_loss_tape(tape, bundle, batch, {0.9});
  };
  CHECK(ad::grad_check(build_v, bundle.critic_enc.params(), 1e-5) <= 1e-4);
}

TEST_CASE("critic value: padding width is enforced") {
  auto bundle = make_bundle(4, 3, 6, 0.1, 107);
  Rng rng(109);
  CHECK_THROWS_AS(rl::critic_value(bundle, random_tensor(7, 4, rng)), ShapeError);
  const double v = rl::critic_value(bundle, random_tensor(5, 4, rng));
  CHECK(std::isfinite(v));
}
