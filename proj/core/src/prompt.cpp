#include "leap/prompt.hpp"

#include <cmath>
#include <string>

#include "leap/errors.hpp"

namespace leap {

PromptBasis PromptBasis::make(std::size_t k, std::size_t feature_dim, Rng& rng,
                              double init_range) {
  if (k < 1) throw ConfigError("prompt basis: k must be >= 1");
  if (feature_dim < 1) throw ConfigError("prompt basis: feature dim must be >= 1");
  Tensor b(k, feature_dim), a(k, feature_dim);
  for (double& v : b.data()) v = rng.uniform(-init_range, init_range);
  for (double& v : a.data()) v = rng.uniform(-init_range, init_range);
  PromptBasis out;
  out.basis = ad::Parameter("prompt.basis", std::move(b));
  out.projections = ad::Parameter("prompt.projections", std::move(a));
  return out;
}

namespace {
void check_dims(const Tensor& features, const PromptBasis& basis) {
  if (features.cols() != basis.dim())
    throw ShapeError("attentive_prompts: features " + features.shape_str() +
                     " vs basis dim " + std::to_string(basis.dim()));
}
}  // namespace

Tensor attentive_prompts(const Tensor& features, const PromptBasis& basis) {
  check_dims(features, basis);
  const std::size_t n = features.rows(), k = basis.k();
  Tensor logits = matmul(features, transpose(basis.projections.value));  // N x k
  Tensor alpha(n, k);
  for (std::size_t i = 0; i < n; ++i) {
    double mx = logits.at(i, 0);
    for (std::size_t j = 1; j < k; ++j) mx = std::max(mx, logits.at(i, j));
    double denom = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      alpha.at(i, j) = std::exp(logits.at(i, j) - mx);
      denom += alpha.at(i, j);
    }
    for (std::size_t j = 0; j < k; ++j) alpha.at(i, j) /= denom;
  }
  return matmul(alpha, basis.basis.value);
}

ad::Val attentive_prompts(ad::Tape& tape, const Tensor& features, PromptBasis& basis) {
  check_dims(features, basis);
  const ad::Val x = tape.constant(features);
  const ad::Val logits = tape.matmul(x, tape.transpose(tape.param(basis.projections)));
  const ad::Val alpha = tape.row_softmax(logits);
  return tape.matmul(alpha, tape.param(basis.basis));
}

Tensor apply_prompt(const Tensor& features, const Tensor& prompts) {
  if (!features.same_shape(prompts))
    throw ShapeError("apply_prompt: features " + features.shape_str() + " vs prompts " +
                     prompts.shape_str());
  return add(features, prompts);
}

PromptState PromptState::init(Tensor initial_prompts) {
  PromptState s;
  s.counts.assign(initial_prompts.rows(), 0);
  s.prompts = std::move(initial_prompts);
  s.step = 0;
  return s;
}

void edit(PromptState& state, std::size_t node, const Tensor& delta) {
  if (node >= state.num_nodes())
    throw IndexError("edit: node " + std::to_string(node) + " out of range for N=" +
                     std::to_string(state.num_nodes()));
  if (delta.rows() != 1 || delta.cols() != state.prompts.cols())
    throw ShapeError("edit: delta " + delta.shape_str() + " vs prompts " +
                     state.prompts.shape_str());
  for (std::size_t d = 0; d < delta.cols(); ++d) state.prompts.at(node, d) += delta.at(0, d);
  state.counts[node] += 1;
  state.step += 1;
}

double ecr(const std::vector<long>& counts) {
  if (counts.empty()) throw ConfigError("ecr: empty count vector");
  std::size_t edited = 0;
  for (long c : counts)
    if (c != 0) ++edited;
  return static_cast<double>(edited) / static_cast<double>(counts.size());
}

}  // namespace leap
