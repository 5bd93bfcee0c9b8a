#pragma once

#include <cstdint>
#include <vector>

#include "leap/ad/tape.hpp"
#include "leap/rng.hpp"
#include "leap/tensor.hpp"

namespace leap {

// k basis prompt vectors plus k linear projections. Node i receives
// p_i = sum_j alpha_{i,j} basis_j with alpha = softmax_j(projection_j . x_i),
// so every node gets a prompt row by construction.
struct PromptBasis {
  ad::Parameter basis;        // k x D
  ad::Parameter projections;  // k x D

  static PromptBasis make(std::size_t k, std::size_t feature_dim, Rng& rng,
                          double init_range = 0.01);
  std::size_t k() const { return basis.value.rows(); }
  std::size_t dim() const { return basis.value.cols(); }
  std::vector<ad::Parameter*> params() { return {&basis, &projections}; }
};

Tensor attentive_prompts(const Tensor& features, const PromptBasis& basis);
ad::Val attentive_prompts(ad::Tape& tape, const Tensor& features, PromptBasis& basis);

// X* = X + p.
Tensor apply_prompt(const Tensor& features, const Tensor& prompts);

// Evolving per-node prompt matrix with an edit-count vector.
struct PromptState {
  Tensor prompts;              // N x D
  std::vector<long> counts;    // per-node edits since reset
  std::size_t step = 0;

  static PromptState init(Tensor initial_prompts);
  std::size_t num_nodes() const { return prompts.rows(); }
};

// prompts[node] += delta; counts[node] += 1; step += 1. The caller clamps
// delta to the edit range beforehand.
void edit(PromptState& state, std::size_t node, const Tensor& delta);

// Fraction of nodes edited at least once.
double ecr(const std::vector<long>& counts);

}  // namespace leap
