#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "leap/gnn/linear.hpp"
#include "leap/graph.hpp"

namespace leap::verify {

// Constructive check that a prompt matrix can reproduce one atomic graph
// manipulation on a linear message-passing stack. `residual` is always
// measured by an independent forward-pass comparison, never by the solver.
struct EquivalenceReport {
  Tensor prompt;        // N x D
  double residual = 0.0;
  bool solvable = true;
  std::string notes;
};

// Case 1, feature modification: p = deltaX reproduces f(A, X + deltaX).
EquivalenceReport simulate_feature_mod(const gnn::LinearGnn& model, const Graph& g,
                                       const Tensor& delta_x);

// Case 2, structure modification: solve S' p = (S'' - S') X so that
// f(A, X + p) matches f(A_hat, X) node-wise.
EquivalenceReport simulate_structure_mod(const gnn::LinearGnn& model, const Graph& g,
                                         const Tensor& a_hat);

// Case 3, adding a disconnected component: the node-wise statement equates
// matrices of different heights, so equivalence is enforced at the pooled
// (sum-readout) level with a minimum-norm prompt.
EquivalenceReport simulate_component_add(const gnn::LinearGnn& model, const Graph& g,
                                         const Tensor& component_adjacency,
                                         const Tensor& component_features);

// Necessity counterexample (single layer): add edge (j,k) and shift node j's
// features by delta while forcing prompt row j to zero. The constrained
// system is consistent only at one forced delta.
struct NecessityReport {
  Tensor forced_delta;  // 1 x D
  bool consistent = false;
  double residual = 0.0;  // least-squares residual of the constrained system
};

NecessityReport necessity_witness(const gnn::LinearGnn& model, const Graph& g,
                                  std::size_t j, std::size_t k, const Tensor& delta);

struct RankReport {
  bool full_row_rank = false;
  double min_singular_value = 0.0;
};

RankReport row_rank_check(const Tensor& w);

// Randomized trial harness shared by the CLI and the acceptance suite.
struct TrialConfig {
  std::size_t cases = 200;
  std::size_t min_nodes = 3, max_nodes = 8;
  std::size_t min_dim = 2, max_dim = 6;
  std::vector<std::size_t> layer_choices{1, 2, 3};
  double eps_lo = 0.2, eps_hi = 1.0;
  double tol_case1 = 1e-12;
  double tol_case2 = 1e-8;
  double tol_case3 = 1e-6;
  double tol_consistent = 1e-9;     // necessity residual at the forced delta
  double tol_inconsistent = 1e-3;   // necessity residual away from it
  double delta_separation = 0.1;    // max-norm distance of the perturbed delta
  std::uint64_t seed = 42;
};

struct TrialRecord {
  std::string kind;  // feature | structure | component | necessity-(in)consistent
  std::size_t n = 0, d = 0, l = 0;
  double residual = 0.0;
  bool solvable = true;
  bool pass = false;
};

struct TrialSummary {
  std::vector<TrialRecord> records;
  bool all_pass = true;
  double max_residual_feature = 0.0;
  double max_residual_structure = 0.0;
  double max_residual_component = 0.0;
  double max_residual_consistent = 0.0;
  double min_residual_inconsistent = 0.0;
};

TrialSummary run_sufficiency_trials(const TrialConfig& config);
TrialSummary run_necessity_trials(const TrialConfig& config);

}  // namespace leap::verify
