#include "leap/gnn/linear.hpp"

#include <string>

#include "leap/errors.hpp"
#include "leap/graph.hpp"

namespace leap::gnn {

Tensor collapsed_diffusion(const LinearGnn& model, const Tensor& adjacency) {
  if (model.layers.empty()) throw ConfigError("linear gnn has no layers");
  Tensor prod = diffusion(adjacency, model.layers[0].epsilon).values;
  for (std::size_t l = 1; l < model.layers.size(); ++l)
    prod = matmul(diffusion(adjacency, model.layers[l].epsilon).values, prod);
  return prod;
}

Tensor collapsed_weight(const LinearGnn& model) {
  if (model.layers.empty()) throw ConfigError("linear gnn has no layers");
  Tensor prod = model.layers[0].weight;
  for (std::size_t l = 1; l < model.layers.size(); ++l) {
    if (prod.cols() != model.layers[l].weight.rows())
      throw ShapeError("linear gnn weight chain mismatch at layer " + std::to_string(l) +
                       ": " + prod.shape_str() + " * " + model.layers[l].weight.shape_str());
    prod = matmul(prod, model.layers[l].weight);
  }
  return prod;
}

Tensor linear_forward(const LinearGnn& model, const Tensor& features,
                      const Tensor& adjacency) {
  if (features.cols() != model.in_dim())
    throw ShapeError("linear_forward: features " + features.shape_str() +
                     " do not match model input dim " + std::to_string(model.in_dim()));
  if (adjacency.rows() != features.rows())
    throw ShapeError("linear_forward: adjacency " + adjacency.shape_str() +
                     " does not match features " + features.shape_str());
  const Tensor s = collapsed_diffusion(model, adjacency);
  const Tensor w = collapsed_weight(model);
  return matmul(matmul(s, features), w);
}

}  // namespace leap::gnn
