#include "leap/gnn/pretrain.hpp"

#include <algorithm>
#include <cmath>

#include "leap/ad/optim.hpp"
#include "leap/errors.hpp"

namespace leap::gnn {

namespace {

std::vector<std::pair<std::size_t, std::size_t>> non_edges(const Graph& g) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < g.num_nodes; ++i)
    for (std::size_t j = i + 1; j < g.num_nodes; ++j)
      if (g.adjacency.at(i, j) == 0.0) out.emplace_back(i, j);
  return out;
}

// Stacked sigmoid(h_i . h_j) for the given pairs, as a P x 1 tape value.
ad::Val pair_probabilities(ad::Tape& tape, ad::Val embeddings,
                           const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  const ad::Val gram = tape.matmul(embeddings, tape.transpose(embeddings));
  const std::size_t n = tape.value(embeddings).rows();
  ad::Val stacked;
  for (const auto& [i, j] : pairs) {
    const ad::Val s = tape.pick(gram, i * n + j);
    stacked = stacked.valid() ? tape.concat_rows(stacked, s) : s;
  }
  return tape.sigmoid(stacked);
}

}  // namespace

PretrainResult pretrain_masked_edge(GinModel model, const std::vector<Graph>& graphs,
                                    const PretrainConfig& config, std::uint64_t seed) {
  if (graphs.empty()) throw ConfigError("pretrain: no graphs");
  bool any_edge = false;
  for (const auto& g : graphs) any_edge = any_edge || g.num_edges() > 0;
  if (!any_edge) throw ConfigError("pretrain: no graph has an edge");

  model.set_frozen(false);
  PretrainResult result;
  ad::Sgd opt(config.lr, 0.0, config.momentum);
  const Rng root = Rng(seed).stream(0x70726574);  // "pret"

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    double epoch_loss = 0.0;
    std::size_t contributing = 0;
    for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
      const Graph& g = graphs[gi];
      auto positives = g.edges();
      if (positives.empty()) continue;
      auto negatives = non_edges(g);
      if (negatives.empty())
        throw SamplingError("pretrain: graph " + std::to_string(gi) +
                            " has no absent pair to sample");
      Rng rng = root.stream(epoch * 0x10001ULL + gi);
      rng.shuffle(negatives);
      if (negatives.size() > positives.size()) negatives.resize(positives.size());

      std::vector<std::pair<std::size_t, std::size_t>> pairs = positives;
      pairs.insert(pairs.end(), negatives.begin(), negatives.end());
      std::vector<double> labels(positives.size(), 1.0);
      labels.resize(pairs.size(), 0.0);

      ad::Tape tape;
      Rng drop_rng = rng.stream(0xd0);
      ad::Val h = gin_forward(tape, model, tape.constant(g.features), g.adjacency,
                              Mode::kTrain, /*trainable=*/true, &drop_rng);
      ad::Val probs = pair_probabilities(tape, h, pairs);
      ad::Val loss = tape.bce(probs, labels);
      epoch_loss += tape.value(loss).item();
      ++contributing;
      tape.backward(loss);
      opt.step(model.params());
    }
    result.losses.push_back(epoch_loss / static_cast<double>(std::max<std::size_t>(1, contributing)));
  }

  model.set_frozen(true);
  result.model = std::move(model);
  return result;
}

std::vector<double> edge_scores(const GinModel& model, const Graph& g,
                                const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  const Tensor h = gin_forward(model, g.features, g.adjacency, Mode::kEval);
  std::vector<double> scores;
  scores.reserve(pairs.size());
  for (const auto& [i, j] : pairs) {
    double dot = 0.0;
    for (std::size_t d = 0; d < h.cols(); ++d) dot += h.at(i, d) * h.at(j, d);
    scores.push_back(1.0 / (1.0 + std::exp(-dot)));
  }
  return scores;
}

}  // namespace leap::gnn
