#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "leap/errors.hpp"
#include "leap/train/config.hpp"
#include "leap/train/metrics.hpp"
#include "leap/train/report.hpp"
#include "leap/train/trainer.hpp"

using namespace leap;
using train::RunConfig;
using train::Variant;

namespace {

// Tiny, fast dataset + config for structural checks.
RunConfig tiny_config() {
  RunConfig config;
  config.task = "graph";
  config.seed = 11;
  config.epochs = 4;
  config.patience = 100;
  config.batch_size = 8;
  config.gen.graphs_per_class = 12;
  config.gen.nodes_min = 8;
  config.gen.nodes_max = 8;  // fixed N so the resolved horizon is uniform
  config.gen.feature_dim = 4;
  config.gin_layers = 2;
  config.gin_hidden = 8;
  config.policy_hidden = 8;
  config.head_hidden = 8;
  config.k = 3;
  config.pretrain_epochs = 2;
  config.ppo_minibatch = 32;
  config.resolve();
  return config;
}

struct Fixture {
  train::TaskData data;
  gnn::GinModel backbone;
};

Fixture make_fixture(const RunConfig& config) {
  Fixture f;
  f.data = train::build_task_data(config);
  f.backbone = train::pretrain_backbone(config, f.data);
  return f;
}

}  // namespace

TEST_CASE("config: defaults, overrides, unknown keys") {
  std::map<std::string, std::string> kv;
  auto config = train::config_from_map(kv);
  CHECK(config.h == 3);
  CHECK(config.gin_layers == 3);
  CHECK(config.horizon_frac == 0.25);

  kv["task"] = "node";
  config = train::config_from_map(kv);
  CHECK(config.h == 4);
  CHECK(config.gin_layers == 2);

  kv["shots"] = "10";
  config = train::config_from_map(kv);
  CHECK(config.horizon_frac == 0.5);

  kv["bogus_key"] = "1";
  CHECK_THROWS_WITH_AS(train::config_from_map(kv), doctest::Contains("bogus_key"),
                       ConfigError);
  kv.erase("bogus_key");
  kv["epochs"] = "ten";
  CHECK_THROWS_AS(train::config_from_map(kv), ConfigError);
  kv["epochs"] = "10";
  train::apply_override(kv, "theta=0.9");
  config = train::config_from_map(kv);
  CHECK(config.theta == 0.9);
  CHECK_THROWS_AS(train::apply_override(kv, "no-equals-sign"), ConfigError);

  // echo covers every accepted key
  const auto echo = config.echo();
  CHECK(echo.size() >= 40);
  bool saw_theta = false;
  for (const auto& [k, v] : echo) saw_theta = saw_theta || (k == "theta");
  CHECK(saw_theta);
}

TEST_CASE("metrics: perfect, reversed, Mann-Whitney oracle with ties") {
  CHECK(train::roc_auc({0.9, 0.8, 0.1, 0.2}, {1, 1, 0, 0}) == 1.0);
  CHECK(train::roc_auc({0.1, 0.2, 0.9, 0.8}, {1, 1, 0, 0}) == 0.0);
  CHECK(train::accuracy({1, 0, 1}, {1, 0, 1}) == 1.0);
  CHECK(train::macro_f1({1, 0, 1}, {1, 0, 1}, 2) == 1.0);

  Rng rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> scores;
    std::vector<int> labels;
    for (int i = 0; i < 40; ++i) {
      // coarse grid scores force plenty of ties
      scores.push_back(std::round(rng.uniform() * 8.0) / 8.0);
      labels.push_back(rng.bernoulli(0.4) ? 1 : 0);
    }
    std::size_t pos = 0;
    for (int y : labels) pos += static_cast<std::size_t>(y);
    if (pos == 0 || pos == labels.size()) continue;
    // brute-force U statistic with half credit for ties
    double u = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i)
      for (std::size_t j = 0; j < scores.size(); ++j) {
        if (labels[i] != 1 || labels[j] != 0) continue;
        if (scores[i] > scores[j]) u += 1.0;
        else if (scores[i] == scores[j]) u += 0.5;
      }
    const double oracle = u / (static_cast<double>(pos) *
                               static_cast<double>(labels.size() - pos));
    CHECK(train::roc_auc(scores, labels) == doctest::Approx(oracle).epsilon(1e-12));
  }
}

TEST_CASE("aggregate: single value, permutation invariance, hand oracle") {
  auto single = train::aggregate({0.7});
  CHECK(single.mean == 0.7);
  CHECK(single.stddev == 0.0);

  std::vector<double> xs{0.4, 0.9, 0.1, 0.6, 0.6};
  auto a = train::aggregate(xs);
  std::vector<double> permuted{0.6, 0.1, 0.9, 0.6, 0.4};
  auto b = train::aggregate(permuted);
  CHECK(a.mean == b.mean);
  CHECK(a.stddev == b.stddev);

  double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  double var = 0.0;
  for (double v : xs) var += (v - mean) * (v - mean);
  CHECK(a.mean == doctest::Approx(mean).epsilon(1e-12));
  CHECK(a.stddev == doctest::Approx(std::sqrt(var / xs.size())).epsilon(1e-12));
}

TEST_CASE("task data: instance counts, split wiring, few shot") {
  RunConfig config = tiny_config();
  auto data = train::build_task_data(config);
  CHECK(data.instances.size() == 24);
  CHECK(data.split.train.size() + data.split.val.size() + data.split.test.size() == 24);
  CHECK(data.max_nodes == 8);
  CHECK(data.feature_dim == 4);

  RunConfig few = config;
  few.shots = 6;
  few.resolve();
  auto few_data = train::build_task_data(few);
  CHECK(few_data.split.train.size() == 6);

  RunConfig node_cfg = config;
  node_cfg.task = "node";
  node_cfg.h = -1;
  node_cfg.gin_layers = -1;
  node_cfg.hops = 1;
  node_cfg.gen.node_task_nodes = 20;
  node_cfg.resolve();
  auto node_data = train::build_task_data(node_cfg);
  CHECK(node_data.instances.size() == 20);
  CHECK(node_data.num_classes == 2);
}

TEST_CASE("train_leap: epochs 0 still reports metrics once") {
  RunConfig config = tiny_config();
  config.epochs = 0;
  auto fx = make_fixture(config);
  auto result = train::train_leap(fx.data, fx.backbone, config, Variant::kFull);
  CHECK(result.metrics.epochs_run == 0);
  CHECK(result.metrics.curve.empty());
  CHECK(result.metrics.roc_auc >= 0.0);
  CHECK(result.metrics.roc_auc <= 1.0);
}

TEST_CASE("train_leap: policy update count is floor(epochs / h)") {
  RunConfig config = tiny_config();
  config.h = 2;
  config.epochs = 5;
  auto fx = make_fixture(config);
  auto result = train::train_leap(fx.data, fx.backbone, config, Variant::kFull);
  CHECK(result.metrics.epochs_run == 5);
  CHECK(result.metrics.policy_updates == 2);
}

TEST_CASE("train_leap: backbone frozen, episode edits equal the resolved horizon") {
  RunConfig config = tiny_config();
  auto fx = make_fixture(config);
  const auto checksum = fx.backbone.checksum();
  auto result = train::train_leap(fx.data, fx.backbone, config, Variant::kFull);
  CHECK(fx.backbone.checksum() == checksum);
  CHECK(result.metrics.backbone_checksum == checksum);
  // N = 8 and horizon_frac defaults to 1/4 -> T = 2 for every episode
  CHECK(result.metrics.mean_episode_edits == doctest::Approx(2.0));
  CHECK(result.metrics.episodes ==
        result.metrics.epochs_run * fx.data.split.train.size());
  CHECK(result.metrics.mean_distinct_edited <= 2.0);
  CHECK(result.metrics.mean_distinct_edited > 0.0);
}

TEST_CASE("train_leap: same seed and config reproduce metrics bit-identically") {
  RunConfig config = tiny_config();
  config.epochs = 3;
  auto fx = make_fixture(config);
  auto a = train::train_leap(fx.data, fx.backbone, config, Variant::kFull);
  auto b = train::train_leap(fx.data, fx.backbone, config, Variant::kFull);
  CHECK(train::metrics_jsonl(config, "run", a.metrics) ==
        train::metrics_jsonl(config, "run", b.metrics));
  CHECK(gnn::serialize_checkpoint(a.checkpoint) == gnn::serialize_checkpoint(b.checkpoint));
}

TEST_CASE("train_leap: horizon_frac 0 degenerates to head + prompt tuning") {
  RunConfig config = tiny_config();
  config.horizon_frac = 0.0;
  config.lambda_e = 0.0;
  auto fx = make_fixture(config);
  auto result = train::train_leap(fx.data, fx.backbone, config, Variant::kFull);
  CHECK(result.metrics.episodes == 0);
  CHECK(result.metrics.policy_updates == 0);
  CHECK(result.metrics.mean_episode_edits == 0.0);
}

TEST_CASE("train_leap: no_ecr variant equals full variant with lambda_e zero") {
  RunConfig config = tiny_config();
  config.epochs = 3;
  auto fx = make_fixture(config);
  auto no_ecr = train::train_leap(fx.data, fx.backbone, config, Variant::kNoEcr);

  RunConfig zeroed = config;
  zeroed.lambda_e = 0.0;
  auto full_zero = train::train_leap(fx.data, fx.backbone, zeroed, Variant::kFull);
  CHECK(no_ecr.metrics.roc_auc == full_zero.metrics.roc_auc);
  CHECK(no_ecr.metrics.accuracy == full_zero.metrics.accuracy);
  CHECK(no_ecr.metrics.mean_distinct_edited == full_zero.metrics.mean_distinct_edited);
}

TEST_CASE("train_leap: unfrozen backbone and empty split are rejected") {
  RunConfig config = tiny_config();
  auto fx = make_fixture(config);
  gnn::GinModel thawed = fx.backbone;
  thawed.set_frozen(false);
  CHECK_THROWS_AS(train::train_leap(fx.data, thawed, config, Variant::kFull), ConfigError);

  auto empty = fx.data;
  empty.split.train.clear();
  CHECK_THROWS_AS(train::train_leap(empty, fx.backbone, config, Variant::kFull),
                  ConfigError);
}

TEST_CASE("checkpoint reload reproduces evaluation metrics bit-identically") {
  RunConfig config = tiny_config();
  config.epochs = 2;
  auto fx = make_fixture(config);
  auto result = train::train_leap(fx.data, fx.backbone, config, Variant::kFull);

  const std::string text = gnn::serialize_checkpoint(result.checkpoint);
  const auto reloaded = gnn::parse_checkpoint(text);
  auto eval1 = train::evaluate_checkpoint(reloaded, fx.data, fx.data.split.test);
  CHECK(eval1.roc_auc == result.metrics.roc_auc);
  CHECK(eval1.accuracy == result.metrics.accuracy);
  CHECK(eval1.macro_f1 == result.metrics.macro_f1);

  // evaluation order invariance: reversed index list, same metrics
  std::vector<std::size_t> reversed(fx.data.split.test.rbegin(), fx.data.split.test.rend());
  auto eval2 = train::evaluate_checkpoint(reloaded, fx.data, reversed);
  CHECK(eval2.roc_auc == eval1.roc_auc);
  CHECK(eval2.accuracy == eval1.accuracy);
}

TEST_CASE("ablation: every variant completes and reports comparable records") {
  RunConfig config = tiny_config();
  config.epochs = 2;
  auto fx = make_fixture(config);
  for (Variant v : {Variant::kFull, Variant::kGpf, Variant::kGpfPlus, Variant::kNoEcr,
                    Variant::kHeadOnly}) {
    auto result = train::train_leap(fx.data, fx.backbone, config, v);
    CHECK(result.metrics.roc_auc >= 0.0);
    CHECK(result.metrics.roc_auc <= 1.0);
    CHECK(result.metrics.epochs_run == 2);
    if (v == Variant::kHeadOnly) CHECK(result.metrics.episodes == 0);
  }
}

TEST_CASE("seed_sweep: aggregates and permutation invariance") {
  RunConfig config = tiny_config();
  config.epochs = 2;
  auto fx = make_fixture(config);

  auto single = train::seed_sweep(fx.data, fx.backbone, config, Variant::kFull, {7});
  CHECK(single.roc_auc.stddev == 0.0);

  auto ab = train::seed_sweep(fx.data, fx.backbone, config, Variant::kFull, {1, 2});
  auto ba = train::seed_sweep(fx.data, fx.backbone, config, Variant::kFull, {2, 1});
  CHECK(ab.roc_auc.mean == ba.roc_auc.mean);
  CHECK(ab.roc_auc.stddev == ba.roc_auc.stddev);

  const auto agg = train::aggregate({ab.per_seed[0].roc_auc, ab.per_seed[1].roc_auc});
  CHECK(ab.roc_auc.mean == agg.mean);
  CHECK(ab.roc_auc.stddev == agg.stddev);
}

TEST_CASE("node task: full pipeline runs end to end") {
  RunConfig config;
  config.task = "node";
  config.seed = 5;
  config.epochs = 2;
  config.patience = 100;
  config.hops = 1;
  config.gen.node_task_nodes = 24;
  config.gen.feature_dim = 4;
  config.gin_hidden = 8;
  config.policy_hidden = 8;
  config.head_hidden = 8;
  config.k = 3;
  config.pretrain_epochs = 2;
  config.resolve();
  CHECK(config.h == 4);
  CHECK(config.gin_layers == 2);

  auto data = train::build_task_data(config);
  auto backbone = train::pretrain_backbone(config, data);
  auto result = train::train_leap(data, backbone, config, Variant::kFull);
  CHECK(result.metrics.accuracy >= 0.0);
  CHECK(result.metrics.accuracy <= 1.0);
  CHECK(result.metrics.macro_f1 >= 0.0);
  CHECK(result.metrics.epochs_run == 2);
}
