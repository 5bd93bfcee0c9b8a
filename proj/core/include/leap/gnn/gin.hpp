#pragma once

#include <cstdint>
#include <vector>

#include "leap/ad/mlp.hpp"
#include "leap/ad/tape.hpp"
#include "leap/rng.hpp"
#include "leap/tensor.hpp"

namespace leap::gnn {

enum class Mode { kTrain, kEval };
enum class Readout { kSum, kMean };

struct GinConfig {
  std::size_t layers = 3;
  std::size_t hidden = 32;
  double dropout = 0.5;
  double epsilon = 0.0;  // fixed per layer
  // Damping applied to each layer MLP's input weights at init. The neighbor
  // sum grows activations by roughly (1 + degree) per layer; without damping
  // a few layers saturate every sigmoid downstream.
  double init_scale = 0.2;
};

// GIN encoder: layer update h <- MLP((1+eps) h + sum_{u in N(v)} h_u) with a
// two-linear-layer MLP per layer. Dropout is applied to hidden activations in
// train mode only.
struct GinModel {
  std::vector<double> eps;
  std::vector<ad::Mlp> mlps;
  double dropout_rate = 0.5;
  bool frozen = false;

  static GinModel make(std::size_t in_dim, const GinConfig& config, Rng& rng);

  std::size_t in_dim() const { return mlps.front().in_dim(); }
  std::size_t out_dim() const { return mlps.back().out_dim(); }

  std::vector<ad::Parameter*> params();
  void set_frozen(bool frozen);
  // FNV-1a over all parameter bytes; used to assert the backbone never moves.
  std::uint64_t checksum() const;
};

Tensor gin_forward(const GinModel& model, const Tensor& features, const Tensor& adjacency,
                   Mode mode, Rng* dropout_rng = nullptr);

// Differentiable forward. Parameters are registered on the tape when
// `trainable` (gradients flow into them unless frozen); otherwise they enter
// as constants and only the input receives gradient.
ad::Val gin_forward(ad::Tape& tape, GinModel& model, ad::Val features,
                    const Tensor& adjacency, Mode mode, bool trainable,
                    Rng* dropout_rng = nullptr);

// Eval-mode forward over a frozen backbone: parameters enter as constants,
// gradient reaches the (prompted) input features only.
ad::Val gin_forward_frozen(ad::Tape& tape, const GinModel& model, ad::Val features,
                           const Tensor& adjacency);

Tensor readout(const Tensor& node_embeddings, Readout kind);
ad::Val readout(ad::Tape& tape, ad::Val node_embeddings, Readout kind);

// Task head: MLP from the readout dimension to class logits.
struct ProjectionHead {
  ad::Mlp mlp;

  static ProjectionHead make(std::size_t in_dim, std::size_t hidden, std::size_t layers,
                             std::size_t out_dim, Rng& rng);
  std::vector<ad::Parameter*> params() { return mlp.params(); }
};

}  // namespace leap::gnn
