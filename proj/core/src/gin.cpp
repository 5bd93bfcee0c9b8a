#include "leap/gnn/gin.hpp"

#include <cstring>
#include <string>

#include "leap/errors.hpp"

namespace leap::gnn {

GinModel GinModel::make(std::size_t in_dim, const GinConfig& config, Rng& rng) {
  if (config.layers < 1) throw ConfigError("gin: need at least one layer");
  if (config.hidden < 1) throw ConfigError("gin: hidden width must be positive");
  GinModel model;
  model.dropout_rate = config.dropout;
  std::size_t dim = in_dim;
  for (std::size_t l = 0; l < config.layers; ++l) {
    model.eps.push_back(config.epsilon);
    ad::Mlp mlp =
        ad::Mlp::make({dim, config.hidden, config.hidden}, rng, "gin.l" + std::to_string(l));
    for (double& v : mlp.weights[0].value.data()) v *= config.init_scale;
    model.mlps.push_back(std::move(mlp));
    dim = config.hidden;
  }
  return model;
}

std::vector<ad::Parameter*> GinModel::params() {
  std::vector<ad::Parameter*> out;
  for (auto& mlp : mlps)
    for (ad::Parameter* p : mlp.params()) out.push_back(p);
  return out;
}

void GinModel::set_frozen(bool f) {
  frozen = f;
  for (auto& mlp : mlps) mlp.set_frozen(f);
}

std::uint64_t GinModel::checksum() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const Tensor& t) {
    for (double d : t.data()) {
      std::uint64_t bits;
      std::memcpy(&bits, &d, sizeof(bits));
      for (int b = 0; b < 8; ++b) {
        h ^= (bits >> (8 * b)) & 0xffULL;
        h *= 1099511628211ULL;
      }
    }
  };
  for (const auto& mlp : mlps) {
    for (const auto& w : mlp.weights) mix(w.value);
    for (const auto& b : mlp.biases) mix(b.value);
  }
  return h;
}

namespace {
void check_shapes(const GinModel& model, const Tensor& x, const Tensor& a) {
  if (x.cols() != model.in_dim())
    throw ShapeError("gin_forward: features " + x.shape_str() + " do not match input dim " +
                     std::to_string(model.in_dim()));
  if (a.rows() != x.rows() || a.cols() != x.rows())
    throw ShapeError("gin_forward: adjacency " + a.shape_str() + " does not match features " +
                     x.shape_str());
}
}  // namespace

Tensor gin_forward(const GinModel& model, const Tensor& features, const Tensor& adjacency,
                   Mode mode, Rng* dropout_rng) {
  check_shapes(model, features, adjacency);
  const bool drop = mode == Mode::kTrain && model.dropout_rate > 0.0;
  if (drop && dropout_rng == nullptr)
    throw ConfigError("gin_forward: train mode with dropout needs an rng");
  Tensor h = features;
  for (std::size_t l = 0; l < model.mlps.size(); ++l) {
    Tensor pre = add(scale(h, 1.0 + model.eps[l]), matmul(adjacency, h));
    h = model.mlps[l].forward(pre);
    if (drop) {
      const double keep = 1.0 - model.dropout_rate;
      for (double& v : h.data()) v = dropout_rng->bernoulli(keep) ? v / keep : 0.0;
    }
  }
  return h;
}

ad::Val gin_forward(ad::Tape& tape, GinModel& model, ad::Val features,
                    const Tensor& adjacency, Mode mode, bool trainable, Rng* dropout_rng) {
  check_shapes(model, tape.value(features), adjacency);
  const bool drop = mode == Mode::kTrain && model.dropout_rate > 0.0;
  if (drop && dropout_rng == nullptr)
    throw ConfigError("gin_forward: train mode with dropout needs an rng");
  const ad::Val a = tape.constant(adjacency);
  ad::Val h = features;
  for (std::size_t l = 0; l < model.mlps.size(); ++l) {
    ad::Val pre = tape.add(tape.affine(h, 1.0 + model.eps[l], 0.0), tape.matmul(a, h));
    h = trainable ? model.mlps[l].forward(tape, pre) : model.mlps[l].forward_frozen(tape, pre);
    if (drop) h = tape.dropout(h, model.dropout_rate, *dropout_rng);
  }
  return h;
}

ad::Val gin_forward_frozen(ad::Tape& tape, const GinModel& model, ad::Val features,
                           const Tensor& adjacency) {
  check_shapes(model, tape.value(features), adjacency);
  const ad::Val a = tape.constant(adjacency);
  ad::Val h = features;
  for (std::size_t l = 0; l < model.mlps.size(); ++l) {
    ad::Val pre = tape.add(tape.affine(h, 1.0 + model.eps[l], 0.0), tape.matmul(a, h));
    h = model.mlps[l].forward_frozen(tape, pre);
  }
  return h;
}

Tensor readout(const Tensor& node_embeddings, Readout kind) {
  return kind == Readout::kSum ? sum_rows(node_embeddings) : mean_rows(node_embeddings);
}

ad::Val readout(ad::Tape& tape, ad::Val node_embeddings, Readout kind) {
  ad::Val s = tape.sum_rows(node_embeddings);
  if (kind == Readout::kMean) {
    const double n = static_cast<double>(tape.value(node_embeddings).rows());
    s = tape.affine(s, 1.0 / n, 0.0);
  }
  return s;
}

ProjectionHead ProjectionHead::make(std::size_t in_dim, std::size_t hidden,
                                    std::size_t layers, std::size_t out_dim, Rng& rng) {
  if (layers < 1 || layers > 3) throw ConfigError("projection head: layers must be in [1,3]");
  std::vector<std::size_t> sizes{in_dim};
  for (std::size_t l = 0; l + 1 < layers; ++l) sizes.push_back(hidden);
  sizes.push_back(out_dim);
  ProjectionHead head;
  head.mlp = ad::Mlp::make(sizes, rng, "head");
  // Small output layer keeps the initial logits away from sigmoid saturation
  // when the readout is a sum over many nodes.
  for (double& v : head.mlp.weights.back().value.data()) v *= 0.1;
  return head;
}

}  // namespace leap::gnn
