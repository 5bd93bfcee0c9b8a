#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "leap/ad/grad_check.hpp"
#include "leap/ad/optim.hpp"
#include "leap/errors.hpp"
#include "leap/gnn/checkpoint.hpp"
#include "leap/gnn/gin.hpp"
#include "leap/gnn/linear.hpp"
#include "leap/gnn/pretrain.hpp"
#include "leap/graph.hpp"
#include "leap/rng.hpp"
#include "leap/train/metrics.hpp"

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

gnn::LinearGnn random_linear(std::size_t d, std::size_t layers, Rng& rng) {
  gnn::LinearGnn model;
  for (std::size_t l = 0; l < layers; ++l)
    model.layers.push_back({rng.uniform(0.2, 1.0), random_tensor(d, d, rng)});
  return model;
}

// Layer-by-layer evaluation, the oracle for the collapsed product.
Tensor linear_loop_oracle(const gnn::LinearGnn& model, const Tensor& x, const Tensor& a) {
  Tensor h = x;
  for (const auto& layer : model.layers) {
    const Tensor s = diffusion(a, layer.epsilon).values;
    h = matmul(matmul(s, h), layer.weight);
  }
  return h;
}

}  // namespace

TEST_CASE("linear_forward: identity and two-node hand computation") {
  gnn::LinearGnn model;
  model.layers.push_back({0.0, Tensor::identity(3)});
  Rng rng(1);
  Tensor x = random_tensor(4, 3, rng);
  Tensor a(4, 4);
  CHECK(max_abs_diff(gnn::linear_forward(model, x, a), x) == 0.0);

  // single edge, eps = 0: S = [[1,1],[1,1]], output = S X W
  gnn::LinearGnn m2;
  m2.layers.push_back({0.0, Tensor::from_rows({{2.0}})});
  Tensor x2 = Tensor::from_rows({{1.0}, {3.0}});
  Tensor a2 = Tensor::from_rows({{0, 1}, {1, 0}});
  Tensor out = gnn::linear_forward(m2, x2, a2);
  CHECK(out == Tensor::from_rows({{8.0}, {8.0}}));
}

TEST_CASE("linear_forward: collapsed product equals layer loop oracle") {
  Rng rng(7);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 3 + rng.uniform_index(6);
    const std::size_t d = 2 + rng.uniform_index(4);
    Graph g = random_graph(n, d, 0.4, rng);
    auto model = random_linear(d, 3, rng);
    const Tensor fast = gnn::linear_forward(model, g.features, g.adjacency);
    const Tensor slow = linear_loop_oracle(model, g.features, g.adjacency);
    CHECK(max_abs_diff(fast, slow) <= 1e-12 * std::max(1.0, slow.max_abs()));
  }
}

TEST_CASE("gin_forward: empty-edge graph applies the per-node MLP stack") {
  Rng rng(3);
  gnn::GinConfig cfg;
  cfg.layers = 2;
  cfg.hidden = 8;
  cfg.dropout = 0.0;
  gnn::GinModel model = gnn::GinModel::make(4, cfg, rng);
  Tensor x = random_tensor(5, 4, rng);
  Tensor a(5, 5);
  const Tensor out = gnn::gin_forward(model, x, a, gnn::Mode::kEval);
  // oracle: run each node's row through the two MLPs independently
  for (std::size_t i = 0; i < 5; ++i) {
    Tensor row(1, 4);
    for (std::size_t j = 0; j < 4; ++j) row.at(0, j) = x.at(i, j);
    Tensor h = model.mlps[0].forward(row);
    h = model.mlps[1].forward(h);
    for (std::size_t j = 0; j < 8; ++j)
      CHECK(out.at(i, j) == doctest::Approx(h.at(0, j)).epsilon(1e-12));
  }
}

TEST_CASE("gin_forward: permutation equivariance and eval determinism") {
  Rng rng(9);
  gnn::GinConfig cfg;
  cfg.layers = 3;
  cfg.hidden = 16;
  gnn::GinModel model = gnn::GinModel::make(3, cfg, rng);
  Graph g = random_graph(7, 3, 0.5, rng);

  std::vector<std::size_t> perm(7);
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm);
  Tensor px(7, 3), pa(7, 7);
  for (std::size_t i = 0; i < 7; ++i) {
    for (std::size_t j = 0; j < 3; ++j) px.at(i, j) = g.features.at(perm[i], j);
    for (std::size_t j = 0; j < 7; ++j) pa.at(i, j) = g.adjacency.at(perm[i], perm[j]);
  }
  const Tensor out = gnn::gin_forward(model, g.features, g.adjacency, gnn::Mode::kEval);
  const Tensor pout = gnn::gin_forward(model, px, pa, gnn::Mode::kEval);
  for (std::size_t i = 0; i < 7; ++i)
    for (std::size_t j = 0; j < 16; ++j)
      CHECK(pout.at(i, j) == doctest::Approx(out.at(perm[i], j)).epsilon(1e-12));

  CHECK(gnn::gin_forward(model, g.features, g.adjacency, gnn::Mode::kEval) == out);
  CHECK_THROWS_AS(gnn::gin_forward(model, random_tensor(7, 5, rng), g.adjacency,
                                   gnn::Mode::kEval),
                  ShapeError);
}

TEST_CASE("readout: single node, permutation invariance, mean = sum / N") {
  Rng rng(11);
  Tensor single = random_tensor(1, 6, rng);
  CHECK(gnn::readout(single, gnn::Readout::kSum) == single);

  Tensor h = random_tensor(9, 6, rng);
  Tensor hp = h;
  std::vector<std::size_t> perm(9);
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm);
  for (std::size_t i = 0; i < 9; ++i)
    for (std::size_t j = 0; j < 6; ++j) hp.at(i, j) = h.at(perm[i], j);
  CHECK(max_abs_diff(gnn::readout(h, gnn::Readout::kSum),
                     gnn::readout(hp, gnn::Readout::kSum)) <= 1e-12);

  const Tensor mean = gnn::readout(h, gnn::Readout::kMean);
  const Tensor sum = gnn::readout(h, gnn::Readout::kSum);
  CHECK(max_abs_diff(mean, scale(sum, 1.0 / 9.0)) <= 1e-15);
}

TEST_CASE("gin + projection head pass the gradient checker") {
  Rng rng(13);
  gnn::GinConfig cfg;
  cfg.layers = 2;
  cfg.hidden = 6;
  cfg.dropout = 0.0;  // checker requires a deterministic build
  gnn::GinModel model = gnn::GinModel::make(3, cfg, rng);
  gnn::ProjectionHead head = gnn::ProjectionHead::make(6, 5, 2, 1, rng);
  Graph g = random_graph(5, 3, 0.5, rng);

  std::vector<ad::Parameter*> params = model.params();
  for (auto* p : head.params()) params.push_back(p);

  auto build = [&](ad::Tape& tape) {
    auto h = gnn::gin_forward(tape, model, tape.constant(g.features), g.adjacency,
                              gnn::Mode::kEval, true);
    auto pooled = gnn::readout(tape, h, gnn::Readout::kSum);
    auto probs = tape.sigmoid(head.mlp.forward(tape, pooled));
    return tape.bce(probs, {1.0});
  };
  CHECK(ad::grad_check(build, params, 1e-5) <= 1e-4);
}

TEST_CASE("pretrain: zero epochs returns the initialization, frozen afterwards") {
  Rng rng(17);
  gnn::GinConfig cfg;
  cfg.layers = 2;
  cfg.hidden = 8;
  gnn::GinModel model = gnn::GinModel::make(3, cfg, rng);
  const auto before = model.checksum();

  std::vector<Graph> graphs{random_graph(8, 3, 0.5, rng)};
  gnn::PretrainConfig pc;
  pc.epochs = 0;
  auto result = gnn::pretrain_masked_edge(model, graphs, pc, 1);
  CHECK(result.model.checksum() == before);
  CHECK(result.model.frozen);

  ad::Sgd opt(0.1);
  CHECK_THROWS_AS(opt.step(result.model.params()), FrozenModelError);
}

TEST_CASE("pretrain: loss decreases and held-out edge AUC beats chance") {
  Rng rng(19);
  // clique of 6 plus 4 isolated nodes: edges are very predictable
  Tensor adj(10, 10);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = i + 1; j < 6; ++j) {
      adj.at(i, j) = 1.0;
      adj.at(j, i) = 1.0;
    }
  Tensor x(10, 4);
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = 0; j < 4; ++j) x.at(i, j) = rng.normal(i < 6 ? 1.0 : -1.0, 0.3);
  Graph g = make_graph(adj, x);

  gnn::GinConfig cfg;
  cfg.layers = 2;
  cfg.hidden = 8;
  cfg.dropout = 0.0;
  gnn::GinModel model = gnn::GinModel::make(4, cfg, rng);
  gnn::PretrainConfig pc;
  pc.epochs = 40;
  pc.lr = 0.05;
  auto result = gnn::pretrain_masked_edge(model, {g}, pc, 7);
  REQUIRE(result.losses.size() == 40);
  CHECK(result.losses.back() < result.losses.front());

  // held-out pairs not used as 1:1 samples necessarily; score all pairs
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<int> labels;
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = i + 1; j < 10; ++j) {
      pairs.emplace_back(i, j);
      labels.push_back(adj.at(i, j) != 0.0 ? 1 : 0);
    }
  const auto scores = gnn::edge_scores(result.model, g, pairs);
  CHECK(train::roc_auc(scores, labels) > 0.5);
}

TEST_CASE("pretrain: complete graph has no negative pair") {
  Rng rng(23);
  Tensor adj(4, 4, 1.0);
  for (std::size_t i = 0; i < 4; ++i) adj.at(i, i) = 0.0;
  Graph g = make_graph(adj, random_tensor(4, 3, rng));
  gnn::GinConfig cfg;
  cfg.layers = 1;
  cfg.hidden = 4;
  gnn::GinModel model = gnn::GinModel::make(3, cfg, rng);
  gnn::PretrainConfig pc;
  pc.epochs = 1;
  CHECK_THROWS_AS(gnn::pretrain_masked_edge(model, {g}, pc, 1), SamplingError);
}

TEST_CASE("checkpoint: exact weight round trip") {
  Rng rng(29);
  gnn::GinConfig cfg;
  cfg.layers = 3;
  cfg.hidden = 8;
  gnn::GinModel model = gnn::GinModel::make(5, cfg, rng);
  model.set_frozen(true);

  gnn::CheckpointData data;
  data.meta["purpose"] = "test";
  gnn::pack_gin(data, model, "backbone");
  const std::string text = gnn::serialize_checkpoint(data);
  const auto parsed = gnn::parse_checkpoint(text);
  gnn::GinModel back = gnn::unpack_gin(parsed, "backbone");
  CHECK(back.checksum() == model.checksum());
  CHECK(back.frozen);
  CHECK(parsed.meta_value("purpose") == "test");

  CHECK_THROWS_AS(gnn::parse_checkpoint("nonsense"), ParseError);
}
