#include "leap/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "leap/ad/optim.hpp"
#include "leap/errors.hpp"
#include "leap/gnn/pretrain.hpp"
#include "leap/graph_io.hpp"
#include "leap/prompt.hpp"
#include "leap/rl/algo.hpp"

namespace leap::train {

namespace {

constexpr double kProbGuard = 1e-7;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::size_t resolve_horizon(double frac, std::size_t n) {
  if (frac <= 0.0) return 0;
  const double t = std::round(frac * static_cast<double>(n));
  return static_cast<std::size_t>(std::max(1.0, t));
}

// ---------------------------------------------------------------------------
// Model bundle: prompt provider + projection head + policy networks.

struct LeapModel {
  Variant variant = Variant::kFull;
  bool binary = true;
  gnn::Readout readout_kind = gnn::Readout::kSum;
  PromptBasis basis;          // full / gpf(k=1) / no_ecr
  ad::Parameter gpf_table;    // gpf_plus: max_nodes x D, sliced per graph
  gnn::ProjectionHead head;
  rl::PolicyBundle policies;

  bool uses_rl() const { return variant != Variant::kHeadOnly; }
  bool uses_basis() const {
    return variant == Variant::kFull || variant == Variant::kGpf ||
           variant == Variant::kNoEcr;
  }

  std::vector<ad::Parameter*> prompt_params() {
    if (uses_basis()) return basis.params();
    if (variant == Variant::kGpfPlus) return {&gpf_table};
    return {};
  }

  std::vector<ad::Parameter*> tunable_params() {
    std::vector<ad::Parameter*> out = prompt_params();
    for (ad::Parameter* p : head.params()) out.push_back(p);
    if (uses_rl())
      for (ad::Parameter* p : policies.params()) out.push_back(p);
    return out;
  }

  Tensor base_prompts(const Tensor& features) const {
    const std::size_t n = features.rows(), d = features.cols();
    switch (variant) {
      case Variant::kFull:
      case Variant::kGpf:
      case Variant::kNoEcr:
        return attentive_prompts(features, basis);
      case Variant::kGpfPlus: {
        Tensor p(n, d);
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < d; ++j) p.at(i, j) = gpf_table.value.at(i, j);
        return p;
      }
      case Variant::kHeadOnly:
        return Tensor(n, d);
    }
    return Tensor(n, d);
  }

  ad::Val base_prompts(ad::Tape& tape, const Tensor& features) {
    switch (variant) {
      case Variant::kFull:
      case Variant::kGpf:
      case Variant::kNoEcr:
        return attentive_prompts(tape, features, basis);
      case Variant::kGpfPlus: {
        const ad::Val table = tape.param(gpf_table);
        ad::Val sliced = tape.pick_row(table, 0);
        for (std::size_t i = 1; i < features.rows(); ++i)
          sliced = tape.concat_rows(sliced, tape.pick_row(table, i));
        return sliced;
      }
      case Variant::kHeadOnly:
        return tape.constant(Tensor(features.rows(), features.cols()));
    }
    return tape.constant(Tensor(features.rows(), features.cols()));
  }
};

LeapModel make_leap_model(const TaskData& data, const RunConfig& config, Variant variant,
                          Rng& rng) {
  LeapModel model;
  model.variant = variant;
  model.binary = data.num_classes == 2 && config.task == "graph";
  model.readout_kind = config.readout == "sum" ? gnn::Readout::kSum : gnn::Readout::kMean;
  const std::size_t k = variant == Variant::kGpf ? 1 : config.k;
  model.basis = PromptBasis::make(k, data.feature_dim, rng);
  Tensor table(data.max_nodes, data.feature_dim);
  for (double& v : table.data()) v = rng.uniform(-0.01, 0.01);
  model.gpf_table = ad::Parameter("prompt.gpf_table", std::move(table));
  const std::size_t out_dim = model.binary ? 1 : data.num_classes;
  model.head = gnn::ProjectionHead::make(config.gin_hidden, config.head_hidden,
                                         config.head_layers, out_dim, rng);
  model.policies = rl::PolicyBundle::make(config.gin_hidden, data.feature_dim,
                                          config.policy_hidden, data.max_nodes,
                                          config.sigma, rng);
  return model;
}

// ---------------------------------------------------------------------------
// Plain (tape-free) scoring.

struct InstanceScore {
  double loss = 0.0;
  int prediction = 0;
  std::vector<double> class_probs;  // binary: {1-p, p}
};

InstanceScore score_from_embeddings(const LeapModel& model, const Tensor& embeddings,
                                    int label) {
  const Tensor pooled = gnn::readout(embeddings, model.readout_kind);
  const Tensor out = model.head.mlp.forward(pooled);
  InstanceScore score;
  if (model.binary) {
    const double p = std::clamp(sigmoid(out.item()), kProbGuard, 1.0 - kProbGuard);
    score.class_probs = {1.0 - p, p};
    score.prediction = p > 0.5 ? 1 : 0;
    score.loss = label == 1 ? -std::log(p) : -std::log(1.0 - p);
  } else {
    double mx = out[0];
    for (std::size_t j = 1; j < out.size(); ++j) mx = std::max(mx, out[j]);
    double denom = 0.0;
    score.class_probs.resize(out.size());
    for (std::size_t j = 0; j < out.size(); ++j) {
      score.class_probs[j] = std::exp(out[j] - mx);
      denom += score.class_probs[j];
    }
    int best = 0;
    for (std::size_t j = 0; j < out.size(); ++j) {
      score.class_probs[j] /= denom;
      if (score.class_probs[j] > score.class_probs[static_cast<std::size_t>(best)])
        best = static_cast<int>(j);
    }
    score.prediction = best;
    score.loss = -std::log(
        std::max(score.class_probs[static_cast<std::size_t>(label)], kProbGuard));
  }
  if (!std::isfinite(score.loss)) throw NumericError("non-finite downstream loss");
  return score;
}

double loss_from_embeddings(const LeapModel& model, const Tensor& embeddings, int label) {
  return score_from_embeddings(model, embeddings, label).loss;
}

// Deterministic replay: sigma = 0, greedy node choice. Returns the summed
// edit matrix on top of the base prompts.
Tensor deterministic_edits(const LeapModel& model, const gnn::GinModel& backbone,
                           const Instance& inst, const Tensor& base, std::size_t horizon,
                           double theta) {
  Tensor delta(base.rows(), base.cols());
  if (horizon == 0 || !model.uses_rl()) return delta;
  PromptState state = PromptState::init(base);
  for (std::size_t t = 0; t < horizon; ++t) {
    const Tensor emb =
        rl::compute_state(backbone, inst.graph.features, inst.graph.adjacency, state.prompts);
    const auto probs = rl::discrete_policy(model.policies, emb);
    const std::size_t node = rl::sample_node(probs, rl::SelectMode::kGreedy);
    const auto draw = rl::continuous_policy(model.policies, emb, node, 0.0, theta);
    edit(state, node, draw.action.delta);
    for (std::size_t d = 0; d < delta.cols(); ++d)
      delta.at(node, d) += draw.action.delta.at(0, d);
  }
  return delta;
}

struct EvalOutcome {
  double roc_auc = 0.5;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  double mean_loss = 0.0;
};

EvalOutcome evaluate_instances(const LeapModel& model, const gnn::GinModel& backbone,
                               const TaskData& data, const std::vector<std::size_t>& indices,
                               const RunConfig& config) {
  if (indices.empty()) throw ConfigError("evaluate: empty index set");
  std::vector<int> labels, predictions;
  std::vector<std::vector<double>> probs;
  double loss_total = 0.0;
  for (std::size_t idx : indices) {
    const Instance& inst = data.instances[idx];
    const Tensor base = model.base_prompts(inst.graph.features);
    const std::size_t horizon = resolve_horizon(config.horizon_frac, inst.graph.num_nodes);
    const Tensor delta = deterministic_edits(model, backbone, inst, base, horizon, config.theta);
    const Tensor prompts = add(base, delta);
    const Tensor emb =
        rl::compute_state(backbone, inst.graph.features, inst.graph.adjacency, prompts);
    const InstanceScore score = score_from_embeddings(model, emb, inst.label);
    labels.push_back(inst.label);
    predictions.push_back(score.prediction);
    probs.push_back(score.class_probs);
    loss_total += score.loss;
  }
  EvalOutcome out;
  out.mean_loss = loss_total / static_cast<double>(indices.size());
  out.accuracy = accuracy(predictions, labels);
  out.macro_f1 = macro_f1(predictions, labels, data.num_classes);
  if (data.num_classes == 2) {
    std::vector<double> pos;
    for (const auto& p : probs) pos.push_back(p[1]);
    out.roc_auc = roc_auc(pos, labels);
  } else {
    // one-vs-rest mean over classes
    double total = 0.0;
    for (std::size_t c = 0; c < data.num_classes; ++c) {
      std::vector<double> sc;
      std::vector<int> lb;
      for (std::size_t i = 0; i < labels.size(); ++i) {
        sc.push_back(probs[i][c]);
        lb.push_back(labels[i] == static_cast<int>(c) ? 1 : 0);
      }
      total += roc_auc(sc, lb);
    }
    out.roc_auc = total / static_cast<double>(data.num_classes);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Checkpoint packing.

void pack_mlp(gnn::CheckpointData& data, const ad::Mlp& mlp, const std::string& prefix) {
  data.meta[prefix + ".layers"] = std::to_string(mlp.weights.size());
  for (std::size_t l = 0; l < mlp.weights.size(); ++l) {
    data.tensors.emplace_back(prefix + "." + std::to_string(l) + ".w", mlp.weights[l].value);
    data.tensors.emplace_back(prefix + "." + std::to_string(l) + ".b", mlp.biases[l].value);
  }
}

void unpack_mlp(const gnn::CheckpointData& data, ad::Mlp& mlp, const std::string& prefix) {
  const std::size_t layers = std::stoul(data.meta_value(prefix + ".layers"));
  if (layers != mlp.weights.size())
    throw ParseError("checkpoint: mlp '" + prefix + "' layer count mismatch");
  for (std::size_t l = 0; l < layers; ++l) {
    const Tensor& w = data.tensor(prefix + "." + std::to_string(l) + ".w");
    const Tensor& b = data.tensor(prefix + "." + std::to_string(l) + ".b");
    if (!w.same_shape(mlp.weights[l].value) || !b.same_shape(mlp.biases[l].value))
      throw ParseError("checkpoint: mlp '" + prefix + "' shape mismatch at layer " +
                       std::to_string(l));
    mlp.weights[l].value = w;
    mlp.biases[l].value = b;
  }
}

gnn::CheckpointData pack_all(const LeapModel& model, const gnn::GinModel& backbone,
                             const TaskData& data, const RunConfig& config, Variant variant,
                             std::uint64_t rng_state) {
  gnn::CheckpointData ckpt;
  for (const auto& [key, value] : config.echo()) ckpt.meta["cfg." + key] = value;
  ckpt.meta["variant"] = variant_name(variant);
  ckpt.meta["num_classes"] = std::to_string(data.num_classes);
  ckpt.meta["max_nodes"] = std::to_string(data.max_nodes);
  ckpt.meta["feature_dim"] = std::to_string(data.feature_dim);
  ckpt.meta["rng_state"] = std::to_string(rng_state);
  gnn::pack_gin(ckpt, backbone, "backbone");
  ckpt.tensors.emplace_back("prompt.basis", model.basis.basis.value);
  ckpt.tensors.emplace_back("prompt.projections", model.basis.projections.value);
  ckpt.tensors.emplace_back("prompt.gpf_table", model.gpf_table.value);
  pack_mlp(ckpt, model.head.mlp, "head");
  pack_mlp(ckpt, model.policies.discrete_enc, "actor_d");
  pack_mlp(ckpt, model.policies.continuous_enc, "actor_c");
  pack_mlp(ckpt, model.policies.critic_enc, "critic");
  return ckpt;
}

LeapModel unpack_model(const gnn::CheckpointData& ckpt, const TaskData& data,
                       const RunConfig& config, Variant variant) {
  Rng dummy(0);
  LeapModel model = make_leap_model(data, config, variant, dummy);
  model.basis.basis.value = ckpt.tensor("prompt.basis");
  model.basis.projections.value = ckpt.tensor("prompt.projections");
  model.gpf_table.value = ckpt.tensor("prompt.gpf_table");
  unpack_mlp(ckpt, model.head.mlp, "head");
  unpack_mlp(ckpt, model.policies.discrete_enc, "actor_d");
  unpack_mlp(ckpt, model.policies.continuous_enc, "actor_c");
  unpack_mlp(ckpt, model.policies.critic_enc, "critic");
  return model;
}

}  // namespace

// ---------------------------------------------------------------------------
// Task data.

TaskData task_data_from_graphs(std::vector<Graph> graphs, const RunConfig& config) {
  TaskData data;
  if (config.task == "graph") {
    for (auto& g : graphs) {
      if (!g.graph_label) throw ConfigError("graph task requires graph labels");
      Instance inst;
      inst.label = *g.graph_label;
      inst.graph = std::move(g);
      data.instances.push_back(std::move(inst));
    }
    data.num_classes = 2;
  } else {
    // Node task: every labeled node becomes an induced-subgraph instance.
    int max_label = 0;
    for (const auto& g : graphs) {
      if (g.node_labels.empty()) throw ConfigError("node task requires node labels");
      for (std::size_t v = 0; v < g.num_nodes; ++v) {
        const InducedSubgraph sub = induced_subgraph(g, v, config.hops);
        Instance inst;
        inst.graph = sub.subgraph;
        inst.label = g.node_labels[v];
        max_label = std::max(max_label, inst.label);
        data.instances.push_back(std::move(inst));
      }
    }
    data.num_classes = static_cast<std::size_t>(max_label) + 1;
  }
  if (data.instances.empty()) throw ConfigError("dataset has no instances");
  data.feature_dim = data.instances.front().graph.feature_dim();
  for (const auto& inst : data.instances)
    data.max_nodes = std::max(data.max_nodes, inst.graph.num_nodes);

  data.split = split_dataset(data.instances.size(), {0.8, 0.1, 0.1}, config.seed);
  if (config.shots > 0) {
    std::vector<int> train_labels;
    for (std::size_t idx : data.split.train)
      train_labels.push_back(data.instances[idx].label);
    data.split.train = few_shot(data.split.train, train_labels, config.shots, config.seed);
  }
  return data;
}

TaskData build_task_data(const RunConfig& config) {
  if (!config.data_dir.empty()) {
    namespace fs = std::filesystem;
    const fs::path dir(config.data_dir);
    std::ifstream in(dir / "manifest.txt");
    if (!in) throw ConfigError("cannot open manifest in " + config.data_dir);
    std::ostringstream os;
    os << in.rdbuf();
    const auto entries = parse_manifest(os.str());
    std::vector<Graph> graphs;
    bool has_split = false;
    for (const auto& e : entries) {
      Graph g = load_graph((dir / e.file).string());
      if (config.task == "graph" && !g.graph_label) g.graph_label = e.label;
      has_split = has_split || e.split != "none";
      graphs.push_back(std::move(g));
    }
    // Graph-level manifests carry the split assignment; honor it.
    if (config.task == "graph" && has_split) {
      TaskData data;
      data.num_classes = 2;
      for (std::size_t i = 0; i < graphs.size(); ++i) {
        Instance inst;
        inst.label = *graphs[i].graph_label;
        inst.graph = std::move(graphs[i]);
        data.instances.push_back(std::move(inst));
        if (entries[i].split == "train") data.split.train.push_back(i);
        else if (entries[i].split == "val") data.split.val.push_back(i);
        else if (entries[i].split == "test") data.split.test.push_back(i);
      }
      data.split.seed = config.seed;
      data.feature_dim = data.instances.front().graph.feature_dim();
      for (const auto& inst : data.instances)
        data.max_nodes = std::max(data.max_nodes, inst.graph.num_nodes);
      if (config.shots > 0) {
        std::vector<int> train_labels;
        for (std::size_t idx : data.split.train)
          train_labels.push_back(data.instances[idx].label);
        data.split.train = few_shot(data.split.train, train_labels, config.shots, config.seed);
      }
      return data;
    }
    return task_data_from_graphs(std::move(graphs), config);
  }
  std::vector<Graph> graphs;
  if (config.task == "graph") {
    graphs = generate_synthetic_dataset(config.gen, config.seed);
  } else {
    graphs.push_back(generate_node_task_graph(config.gen, config.seed));
  }
  return task_data_from_graphs(std::move(graphs), config);
}

gnn::GinModel pretrain_backbone(const RunConfig& config, const TaskData& data) {
  gnn::GinConfig gc;
  gc.layers = static_cast<std::size_t>(config.gin_layers);
  gc.hidden = config.gin_hidden;
  gc.dropout = config.dropout;
  gc.init_scale = config.gin_init_scale;
  Rng rng = Rng(config.seed).stream(0x6261636b);  // "back"
  gnn::GinModel model = gnn::GinModel::make(data.feature_dim, gc, rng);
  std::vector<Graph> graphs;
  for (std::size_t idx : data.split.train) graphs.push_back(data.instances[idx].graph);
  gnn::PretrainConfig pc;
  pc.epochs = config.pretrain_epochs;
  pc.lr = config.pretrain_lr;
  auto result = gnn::pretrain_masked_edge(std::move(model), graphs, pc, config.seed);
  return std::move(result.model);
}

// ---------------------------------------------------------------------------

TrainResult train_leap(const TaskData& data, const gnn::GinModel& backbone,
                       const RunConfig& raw_config, Variant variant,
                       std::ostream* trajectory_dump) {
  RunConfig config = raw_config;
  config.resolve();
  if (!backbone.frozen) throw ConfigError("train_leap requires a frozen backbone");
  if (data.split.train.empty()) throw ConfigError("train_leap: empty train split");
  const std::uint64_t checksum_before = backbone.checksum();

  Rng master(config.seed);
  Rng init_rng = master.stream(0x696e6974);  // "init"
  LeapModel model = make_leap_model(data, config, variant, init_rng);

  ad::Sgd opt_policy(config.lr_policy);
  ad::Sgd opt_head(config.lr_head, config.weight_decay_head, config.momentum);
  ad::Sgd opt_prompt(config.lr_head, 0.0, config.momentum);

  const double lambda_eff = variant == Variant::kNoEcr ? 0.0 : config.lambda_e;
  const rl::RlConfig rl_cfg = config.rl_config();

  TrainResult result;
  RunMetrics& metrics = result.metrics;

  std::vector<rl::Episode> buffer;
  double total_distinct = 0.0, total_edits = 0.0;
  std::size_t total_episodes = 0;

  double best_val = -1.0;
  std::size_t stale = 0;
  std::vector<Tensor> snapshot;
  auto take_snapshot = [&]() {
    snapshot.clear();
    for (ad::Parameter* p : model.tunable_params()) snapshot.push_back(p->value);
  };
  auto restore_snapshot = [&]() {
    if (snapshot.empty()) return;
    std::size_t i = 0;
    for (ad::Parameter* p : model.tunable_params()) p->value = snapshot[i++];
  };

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    // (1)+(2) rollouts with prompt editing over the current basic prompts
    double epoch_ecr = 0.0, epoch_distinct = 0.0;
    std::size_t epoch_episodes = 0;
    if (model.uses_rl() && config.horizon_frac > 0.0) {
      for (std::size_t idx : data.split.train) {
        const Instance& inst = data.instances[idx];
        const std::size_t horizon = resolve_horizon(config.horizon_frac, inst.graph.num_nodes);
        if (horizon == 0) continue;
        Rng ep_rng = master.stream(0x726f6c6c).stream(epoch).stream(idx);
        const Tensor base = model.base_prompts(inst.graph.features);
        PromptState pstate = PromptState::init(base);
        Tensor emb = rl::compute_state(backbone, inst.graph.features, inst.graph.adjacency,
                                       pstate.prompts);
        double loss_prev = loss_from_embeddings(model, emb, inst.label);
        rl::Episode episode;
        for (std::size_t t = 0; t < horizon; ++t) {
          const Tensor state = emb;
          const auto probs = rl::discrete_policy(model.policies, state);
          const std::size_t node =
              rl::sample_node(probs, rl::SelectMode::kSample, &ep_rng);
          auto draw = rl::continuous_policy(model.policies, state, node, config.sigma,
                                            config.theta, &ep_rng);
          edit(pstate, node, draw.action.delta);
          emb = rl::compute_state(backbone, inst.graph.features, inst.graph.adjacency,
                                  pstate.prompts);
          const double loss_curr = loss_from_embeddings(model, emb, inst.label);
          const double ecr_t = ecr(pstate.counts);
          rl::Transition tr;
          tr.state = state;
          tr.action = std::move(draw.action);
          tr.sample = std::move(draw.sample);
          tr.logp_discrete = std::log(std::max(probs[node], 1e-300));
          tr.logp_continuous = draw.logp;
          tr.reward = rl::reward(loss_prev, loss_curr, ecr_t, lambda_eff);
          tr.value = rl::critic_value(model.policies, state);
          if (trajectory_dump) {
            (*trajectory_dump) << "{\"epoch\":" << epoch << ",\"graph\":" << idx
                               << ",\"step\":" << t << ",\"node\":" << node
                               << ",\"reward\":" << tr.reward << ",\"value\":" << tr.value
                               << ",\"logp_d\":" << tr.logp_discrete
                               << ",\"logp_c\":" << tr.logp_continuous << "}\n";
          }
          episode.push_back(std::move(tr));
          loss_prev = loss_curr;
        }
        std::size_t distinct = 0;
        for (long c : pstate.counts) distinct += c != 0 ? 1 : 0;
        epoch_ecr += ecr(pstate.counts);
        epoch_distinct += static_cast<double>(distinct);
        total_distinct += static_cast<double>(distinct);
        total_edits += static_cast<double>(horizon);
        ++epoch_episodes;
        ++total_episodes;
        buffer.push_back(std::move(episode));
      }
      // (3) policy update every h epochs
      if (epoch % static_cast<std::size_t>(config.h) == 0) {
        Rng update_rng = master.stream(0x75706474).stream(epoch);
        rl::update_policies(buffer, model.policies, rl_cfg, opt_policy, update_rng);
        buffer.clear();
        ++metrics.policy_updates;
      }
    }

    // (4) deterministic replay (sigma = 0) then head + prompt training
    std::vector<Tensor> deltas(data.split.train.size());
    for (std::size_t i = 0; i < data.split.train.size(); ++i) {
      const Instance& inst = data.instances[data.split.train[i]];
      const Tensor base = model.base_prompts(inst.graph.features);
      const std::size_t horizon = resolve_horizon(config.horizon_frac, inst.graph.num_nodes);
      deltas[i] = deterministic_edits(model, backbone, inst, base, horizon, config.theta);
    }
    std::vector<std::size_t> order(data.split.train.size());
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng = master.stream(0x68656164).stream(epoch);
    shuffle_rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      ad::Tape tape;
      ad::Val total;
      for (std::size_t q = start; q < stop; ++q) {
        const std::size_t i = order[q];
        const Instance& inst = data.instances[data.split.train[i]];
        ad::Val prompts = model.base_prompts(tape, inst.graph.features);
        ad::Val prompted = tape.add(tape.constant(inst.graph.features), prompts);
        if (deltas[i].max_abs() > 0.0)
          prompted = tape.add(prompted, tape.constant(deltas[i]));
        ad::Val emb = gnn::gin_forward_frozen(tape, backbone, prompted, inst.graph.adjacency);
        ad::Val pooled = gnn::readout(tape, emb, model.readout_kind);
        ad::Val logits = model.head.mlp.forward(tape, pooled);
        ad::Val loss;
        if (model.binary) {
          loss = tape.bce(tape.sigmoid(logits),
                          {inst.label == 1 ? 1.0 : 0.0});
        } else {
          loss = tape.cross_entropy(logits, {inst.label});
        }
        total = total.valid() ? tape.add(total, loss) : loss;
      }
      total = tape.affine(total, 1.0 / static_cast<double>(stop - start), 0.0);
      tape.backward(total);
      opt_head.step(model.head.params());
      auto pparams = model.prompt_params();
      if (!pparams.empty()) opt_prompt.step(pparams);
    }

    // epoch bookkeeping and early stopping. The train-metric probe uses a
    // fixed subsample; scoring all train instances with full replay every
    // epoch would double the run cost for a curve annotation.
    std::vector<std::size_t> probe(data.split.train.begin(),
                                   data.split.train.begin() +
                                       static_cast<long>(std::min<std::size_t>(
                                           48, data.split.train.size())));
    const EvalOutcome train_eval = evaluate_instances(model, backbone, data, probe, config);
    const EvalOutcome val_eval =
        data.split.val.empty()
            ? train_eval
            : evaluate_instances(model, backbone, data, data.split.val, config);
    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = train_eval.mean_loss;
    record.train_metric = config.task == "graph" ? train_eval.roc_auc : train_eval.accuracy;
    record.val_metric = config.task == "graph" ? val_eval.roc_auc : val_eval.accuracy;
    record.mean_ecr = epoch_episodes > 0 ? epoch_ecr / static_cast<double>(epoch_episodes) : 0.0;
    record.mean_distinct_edited =
        epoch_episodes > 0 ? epoch_distinct / static_cast<double>(epoch_episodes) : 0.0;
    metrics.curve.push_back(record);
    metrics.epochs_run = epoch;

    if (record.val_metric > best_val + 1e-12) {
      best_val = record.val_metric;
      metrics.best_epoch = epoch;
      stale = 0;
      take_snapshot();
    } else {
      ++stale;
      if (stale >= config.patience) break;
    }
  }
  restore_snapshot();
  metrics.best_val_metric = best_val < 0.0 ? 0.0 : best_val;

  const EvalOutcome test_eval = evaluate_instances(
      model, backbone, data, data.split.test.empty() ? data.split.train : data.split.test,
      config);
  metrics.roc_auc = test_eval.roc_auc;
  metrics.accuracy = test_eval.accuracy;
  metrics.macro_f1 = test_eval.macro_f1;
  metrics.episodes = total_episodes;
  metrics.mean_distinct_edited =
      total_episodes > 0 ? total_distinct / static_cast<double>(total_episodes) : 0.0;
  metrics.mean_episode_edits =
      total_episodes > 0 ? total_edits / static_cast<double>(total_episodes) : 0.0;

  if (backbone.checksum() != checksum_before)
    throw NumericError("frozen backbone was modified during training");
  metrics.backbone_checksum = checksum_before;

  result.checkpoint = pack_all(model, backbone, data, config, variant, master.state());
  return result;
}

RunMetrics evaluate_checkpoint(const gnn::CheckpointData& checkpoint, const TaskData& data,
                               const std::vector<std::size_t>& indices) {
  std::map<std::string, std::string> kv;
  for (const auto& [key, value] : checkpoint.meta)
    if (key.rfind("cfg.", 0) == 0) kv[key.substr(4)] = value;
  const RunConfig config = config_from_map(kv);
  const Variant variant = variant_from_name(checkpoint.meta_value("variant"));
  const gnn::GinModel backbone = gnn::unpack_gin(checkpoint, "backbone");
  const LeapModel model = unpack_model(checkpoint, data, config, variant);
  const EvalOutcome eval = evaluate_instances(model, backbone, data, indices, config);
  RunMetrics out;
  out.roc_auc = eval.roc_auc;
  out.accuracy = eval.accuracy;
  out.macro_f1 = eval.macro_f1;
  out.backbone_checksum = backbone.checksum();
  return out;
}

SweepResult seed_sweep(const TaskData& data, const gnn::GinModel& backbone,
                       const RunConfig& config, Variant variant,
                       const std::vector<std::uint64_t>& seeds) {
  if (seeds.empty()) throw ConfigError("seed_sweep: no seeds");
  SweepResult sweep;
  sweep.seeds = seeds;
  std::vector<double> aucs, accs, f1s;
  for (std::uint64_t seed : seeds) {
    RunConfig per_seed = config;
    per_seed.seed = seed;
    TrainResult run = train_leap(data, backbone, per_seed, variant);
    aucs.push_back(run.metrics.roc_auc);
    accs.push_back(run.metrics.accuracy);
    f1s.push_back(run.metrics.macro_f1);
    sweep.per_seed.push_back(std::move(run.metrics));
  }
  sweep.roc_auc = aggregate(aucs);
  sweep.accuracy = aggregate(accs);
  sweep.macro_f1 = aggregate(f1s);
  return sweep;
}

}  // namespace leap::train
