#include "leap/ad/mlp.hpp"

#include <cmath>

#include "leap/errors.hpp"

namespace leap::ad {

Mlp Mlp::make(const std::vector<std::size_t>& sizes, Rng& rng,
              const std::string& name_prefix) {
  if (sizes.size() < 2) throw ConfigError("mlp needs at least input and output sizes");
  Mlp mlp;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const std::size_t in = sizes[l], out = sizes[l + 1];
    Tensor w(in, out);
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    for (double& x : w.data()) x = rng.uniform(-limit, limit);
    mlp.weights.emplace_back(name_prefix + ".w" + std::to_string(l), std::move(w));
    mlp.biases.emplace_back(name_prefix + ".b" + std::to_string(l), Tensor(1, out));
  }
  return mlp;
}

Tensor Mlp::forward(const Tensor& x) const {
  Tensor h = x;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    h = matmul(h, weights[l].value);
    const double* bias = biases[l].value.data().data();
    const std::size_t cols = h.cols();
    double* ph = h.data().data();
    for (std::size_t i = 0; i < h.rows(); ++i)
      for (std::size_t j = 0; j < cols; ++j) ph[i * cols + j] += bias[j];
    if (l + 1 < weights.size())
      for (double& v : h.data()) v = std::max(0.0, v);
  }
  return h;
}

Val Mlp::forward(Tape& tape, Val x) {
  Val h = x;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    h = tape.add_bias(tape.matmul(h, tape.param(weights[l])), tape.param(biases[l]));
    if (l + 1 < weights.size()) h = tape.relu(h);
  }
  return h;
}

Val Mlp::forward_frozen(Tape& tape, Val x) const {
  Val h = x;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    h = tape.add_bias(tape.matmul(h, tape.constant(weights[l].value)),
                      tape.constant(biases[l].value));
    if (l + 1 < weights.size()) h = tape.relu(h);
  }
  return h;
}

std::vector<Parameter*> Mlp::params() {
  std::vector<Parameter*> out;
  for (auto& w : weights) out.push_back(&w);
  for (auto& b : biases) out.push_back(&b);
  return out;
}

void Mlp::set_frozen(bool frozen) {
  for (auto& w : weights) w.frozen = frozen;
  for (auto& b : biases) b.frozen = frozen;
}

}  // namespace leap::ad
