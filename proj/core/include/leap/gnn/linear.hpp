#pragma once

#include <vector>

#include "leap/tensor.hpp"

namespace leap::gnn {

// Linear message-passing stack used for the equivalence verification: layer l
// applies S_l = A + (1 + eps_l) I followed by the frozen linear map W_l, so
// the whole network collapses to (prod S_l) X (prod W_l).
struct LinearGnn {
  struct Layer {
    double epsilon = 0.0;
    Tensor weight;  // D_l x D_{l+1}
  };
  std::vector<Layer> layers;

  std::size_t in_dim() const { return layers.front().weight.rows(); }
  std::size_t out_dim() const { return layers.back().weight.cols(); }
};

// prod_{l=L..1} (A + (1+eps_l) I); the factors commute, computed left-fold.
Tensor collapsed_diffusion(const LinearGnn& model, const Tensor& adjacency);
// W_1 W_2 ... W_L.
Tensor collapsed_weight(const LinearGnn& model);
// (prod S_l) X (prod W_l), computed from the collapsed products.
Tensor linear_forward(const LinearGnn& model, const Tensor& features,
                      const Tensor& adjacency);

}  // namespace leap::gnn
