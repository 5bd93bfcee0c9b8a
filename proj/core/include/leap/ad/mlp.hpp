#pragma once

#include <string>
#include <vector>

#include "leap/ad/tape.hpp"
#include "leap/rng.hpp"

namespace leap::ad {

// Row-wise multilayer perceptron: linear -> ReLU -> ... -> linear. Applied to
// every row of the input independently.
struct Mlp {
  std::vector<Parameter> weights;  // layer l: in x out
  std::vector<Parameter> biases;   // layer l: 1 x out

  // sizes = {in, hidden..., out}; Glorot-uniform weights, zero biases.
  static Mlp make(const std::vector<std::size_t>& sizes, Rng& rng,
                  const std::string& name_prefix);

  std::size_t in_dim() const { return weights.front().value.rows(); }
  std::size_t out_dim() const { return weights.back().value.cols(); }

  Tensor forward(const Tensor& x) const;

  // Differentiable forward with parameters registered on the tape (gradients
  // flow into them unless the parameters are frozen).
  Val forward(Tape& tape, Val x);
  // Parameters enter as constants; gradients flow to the input only.
  Val forward_frozen(Tape& tape, Val x) const;

  std::vector<Parameter*> params();
  void set_frozen(bool frozen);
};

}  // namespace leap::ad
