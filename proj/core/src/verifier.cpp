#include "leap/verify/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "leap/errors.hpp"
#include "leap/linalg.hpp"
#include "leap/rng.hpp"

namespace leap::verify {

namespace {

Tensor stack_block_diag(const Tensor& a, const Tensor& b) {
  const std::size_t n = a.rows(), m = b.rows();
  Tensor out(n + m, n + m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out.at(i, j) = a.at(i, j);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) out.at(n + i, n + j) = b.at(i, j);
  return out;
}

Tensor stack_rows(const Tensor& a, const Tensor& b) {
  Tensor out(a.rows() + b.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out.at(i, j) = a.at(i, j);
  for (std::size_t i = 0; i < b.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) out.at(a.rows() + i, j) = b.at(i, j);
  return out;
}

void check_component(const Tensor& a_c, const Tensor& x_c, std::size_t d) {
  const std::size_t m = x_c.rows();
  if (a_c.rows() != m || a_c.cols() != m)
    throw ShapeError("component adjacency " + a_c.shape_str() + " does not match features " +
                     x_c.shape_str());
  if (m > 0 && x_c.cols() != d)
    throw ShapeError("component feature dim " + x_c.shape_str() + " does not match graph dim " +
                     std::to_string(d));
  for (std::size_t i = 0; i < m; ++i) {
    if (a_c.at(i, i) != 0.0) throw GraphError("component adjacency has a self-loop");
    for (std::size_t j = 0; j < m; ++j)
      if (a_c.at(i, j) != a_c.at(j, i)) throw GraphError("component adjacency not symmetric");
  }
}

}  // namespace

EquivalenceReport simulate_feature_mod(const gnn::LinearGnn& model, const Graph& g,
                                       const Tensor& delta_x) {
  if (!delta_x.same_shape(g.features))
    throw ShapeError("feature mod: deltaX " + delta_x.shape_str() + " vs features " +
                     g.features.shape_str());
  EquivalenceReport report;
  report.prompt = delta_x;
  const Tensor prompted = linear_forward(model, add(g.features, report.prompt), g.adjacency);
  const Tensor target = linear_forward(model, add(g.features, delta_x), g.adjacency);
  report.residual = max_abs_diff(prompted, target);
  report.solvable = true;
  report.notes = "p = deltaX";
  return report;
}

EquivalenceReport simulate_structure_mod(const gnn::LinearGnn& model, const Graph& g,
                                         const Tensor& a_hat) {
  const Tensor s_orig = gnn::collapsed_diffusion(model, g.adjacency);
  const Tensor s_mod = gnn::collapsed_diffusion(model, a_hat);  // validates a_hat
  const Tensor rhs = matmul(sub(s_mod, s_orig), g.features);

  EquivalenceReport report;
  const la::SquareSolve solve = la::solve_square(s_orig, rhs);
  report.prompt = solve.solution;
  if (!solve.invertible) {
    const double sys_res = la::system_residual(s_orig, solve.solution, rhs);
    report.solvable = sys_res <= 1e-8 * std::max(1.0, rhs.max_abs());
    report.notes = "singular collapsed diffusion, least-squares residual " +
                   std::to_string(sys_res);
  } else {
    report.notes = "unique dense solve";
  }
  const Tensor prompted = linear_forward(model, add(g.features, report.prompt), g.adjacency);
  const Tensor target = linear_forward(model, g.features, a_hat);
  report.residual = max_abs_diff(prompted, target);
  return report;
}

EquivalenceReport simulate_component_add(const gnn::LinearGnn& model, const Graph& g,
                                         const Tensor& component_adjacency,
                                         const Tensor& component_features) {
  check_component(component_adjacency, component_features, g.feature_dim());
  EquivalenceReport report;
  const std::size_t m = component_features.rows();
  if (m == 0) {
    report.prompt = Tensor(g.num_nodes, g.feature_dim());
    report.residual = 0.0;
    report.notes = "empty component";
    return report;
  }

  // Pooled constraint: (S'^T 1)^T p = 1^T S'_c X_c, solved at minimum norm.
  const Tensor s_orig = gnn::collapsed_diffusion(model, g.adjacency);
  const Tensor s_comp = gnn::collapsed_diffusion(model, component_adjacency);
  const Tensor gain = sum_rows(matmul(s_comp, component_features));  // 1 x D

  Tensor v(g.num_nodes, 1);
  double vv = 0.0;
  for (std::size_t j = 0; j < g.num_nodes; ++j) {
    double col = 0.0;
    for (std::size_t i = 0; i < g.num_nodes; ++i) col += s_orig.at(i, j);
    v.at(j, 0) = col;
    vv += col * col;
  }
  if (vv < 1e-300) {
    report.prompt = Tensor(g.num_nodes, g.feature_dim());
    report.solvable = false;
    report.notes = "pooled system has zero weights";
    report.residual = std::numeric_limits<double>::infinity();
    return report;
  }
  report.prompt = scale(matmul(v, gain), 1.0 / vv);
  report.notes = "minimum-norm pooled solve, M=" + std::to_string(m);

  const Tensor a_aug = stack_block_diag(g.adjacency, component_adjacency);
  const Tensor x_aug = stack_rows(g.features, component_features);
  const Tensor pooled_target = sum_rows(linear_forward(model, x_aug, a_aug));
  const Tensor pooled_got =
      sum_rows(linear_forward(model, add(g.features, report.prompt), g.adjacency));
  report.residual = max_abs_diff(pooled_got, pooled_target);
  return report;
}

NecessityReport necessity_witness(const gnn::LinearGnn& model, const Graph& g,
                                  std::size_t j, std::size_t k, const Tensor& delta) {
  if (model.layers.size() != 1)
    throw ConfigError("necessity_witness is defined for single-layer models");
  const std::size_t n = g.num_nodes, d = g.feature_dim();
  if (j >= n || k >= n || j == k)
    throw IndexError("necessity_witness: invalid node pair");
  if (g.adjacency.at(j, k) != 0.0)
    throw GraphError("necessity_witness: edge (j,k) must be absent");
  if (delta.rows() != 1 || delta.cols() != d)
    throw ShapeError("necessity_witness: delta must be 1 x D");

  const double eps = model.layers[0].epsilon;
  const Tensor s = diffusion(g.adjacency, eps).values;
  Tensor delta_s(n, n);
  delta_s.at(j, k) = 1.0;
  delta_s.at(k, j) = 1.0;

  // B(delta) = deltaS X + (deltaS + S)[:, j] (x) delta.
  const Tensor base = matmul(delta_s, g.features);
  Tensor col(n, 1);
  for (std::size_t i = 0; i < n; ++i) col.at(i, 0) = delta_s.at(i, j) + s.at(i, j);
  Tensor b = add(base, matmul(col, delta));

  // Consistency of the constrained system (row j of the prompt fixed to 0)
  // reduces to row j of S^{-1} B(delta) vanishing; that pins delta uniquely.
  Tensor e_j(n, 1);
  e_j.at(j, 0) = 1.0;
  const Tensor w = la::solve_square(s, e_j).solution;  // S symmetric
  double c = 0.0;
  for (std::size_t i = 0; i < n; ++i) c += w.at(i, 0) * col.at(i, 0);
  Tensor r(1, d);
  for (std::size_t q = 0; q < d; ++q) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += w.at(i, 0) * base.at(i, q);
    r.at(0, q) = acc;
  }

  NecessityReport report;
  report.forced_delta = Tensor(1, d);
  if (std::fabs(c) > 1e-12)
    for (std::size_t q = 0; q < d; ++q) report.forced_delta.at(0, q) = -r.at(0, q) / c;

  report.consistent = max_abs_diff(delta, report.forced_delta) <= 1e-9;

  // Independent least-squares check: drop column j of S (its prompt row is
  // forced to zero) and measure how well the remaining prompts can satisfy B.
  Tensor s_minus(n, n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t out_col = 0;
    for (std::size_t q = 0; q < n; ++q) {
      if (q == j) continue;
      s_minus.at(i, out_col++) = s.at(i, q);
    }
  }
  const Tensor q_sol = la::lstsq_min_norm(s_minus, b);
  report.residual = la::system_residual(s_minus, q_sol, b);
  return report;
}

RankReport row_rank_check(const Tensor& w) {
  RankReport report;
  const auto sv = la::singular_values(w);
  if (sv.empty()) return report;
  if (w.rows() > w.cols()) {
    report.full_row_rank = false;
    report.min_singular_value = 0.0;
    return report;
  }
  report.min_singular_value = sv.back();
  report.full_row_rank = sv.back() > 1e-10 * sv.front();
  return report;
}

namespace {

Graph random_simple_graph(std::size_t n, std::size_t d, double p, Rng& rng) {
  Tensor adj(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (rng.bernoulli(p)) {
        adj.at(i, j) = 1.0;
        adj.at(j, i) = 1.0;
      }
  Tensor x(n, d);
  for (double& v : x.data()) v = rng.normal();
  return make_graph(std::move(adj), std::move(x));
}

gnn::LinearGnn random_model(std::size_t d, std::size_t layers, double eps_lo, double eps_hi,
                            Rng& rng) {
  gnn::LinearGnn model;
  for (std::size_t l = 0; l < layers; ++l) {
    gnn::LinearGnn::Layer layer;
    layer.epsilon = rng.uniform(eps_lo, eps_hi);
    layer.weight = Tensor(d, d);
    for (double& v : layer.weight.data()) v = rng.normal() / std::sqrt(static_cast<double>(d));
    model.layers.push_back(std::move(layer));
  }
  return model;
}

// Resample epsilons until the collapsed diffusion is comfortably invertible;
// random continuous epsilons almost never land near a singular point, this
// just rules the stragglers out of the trial distribution.
void condition_model(gnn::LinearGnn& model, const Tensor& adjacency, double eps_lo,
                     double eps_hi, Rng& rng) {
  for (int attempt = 0; attempt < 64; ++attempt) {
    if (la::condition_number(gnn::collapsed_diffusion(model, adjacency)) < 1e8) return;
    for (auto& layer : model.layers) layer.epsilon = rng.uniform(eps_lo, eps_hi);
  }
}

}  // namespace

TrialSummary run_sufficiency_trials(const TrialConfig& config) {
  TrialSummary summary;
  Rng root = Rng(config.seed).stream(0x73756666);  // "suff"
  for (std::size_t t = 0; t < config.cases; ++t) {
    Rng rng = root.stream(t);
    const std::size_t n =
        config.min_nodes + rng.uniform_index(config.max_nodes - config.min_nodes + 1);
    const std::size_t d =
        config.min_dim + rng.uniform_index(config.max_dim - config.min_dim + 1);
    const std::size_t layers =
        config.layer_choices[rng.uniform_index(config.layer_choices.size())];
    Graph g = random_simple_graph(n, d, 0.4, rng);
    gnn::LinearGnn model = random_model(d, layers, config.eps_lo, config.eps_hi, rng);
    condition_model(model, g.adjacency, config.eps_lo, config.eps_hi, rng);

    {
      Tensor dx(n, d);
      for (double& v : dx.data()) v = rng.normal();
      auto rep = simulate_feature_mod(model, g, dx);
      TrialRecord rec{"feature", n, d, layers, rep.residual, rep.solvable,
                      rep.solvable && rep.residual <= config.tol_case1};
      summary.max_residual_feature = std::max(summary.max_residual_feature, rep.residual);
      summary.all_pass = summary.all_pass && rec.pass;
      summary.records.push_back(std::move(rec));
    }
    {
      Graph alt = random_simple_graph(n, d, 0.4, rng);
      condition_model(model, alt.adjacency, config.eps_lo, config.eps_hi, rng);
      condition_model(model, g.adjacency, config.eps_lo, config.eps_hi, rng);
      auto rep = simulate_structure_mod(model, g, alt.adjacency);
      TrialRecord rec{"structure", n, d, layers, rep.residual, rep.solvable,
                      rep.solvable && rep.residual <= config.tol_case2};
      summary.max_residual_structure = std::max(summary.max_residual_structure, rep.residual);
      summary.all_pass = summary.all_pass && rec.pass;
      summary.records.push_back(std::move(rec));
    }
    {
      const std::size_t m = 1 + rng.uniform_index(3);
      Graph comp = random_simple_graph(m, d, 0.5, rng);
      auto rep = simulate_component_add(model, g, comp.adjacency, comp.features);
      TrialRecord rec{"component", n, d, layers, rep.residual, rep.solvable,
                      rep.solvable && rep.residual <= config.tol_case3};
      summary.max_residual_component = std::max(summary.max_residual_component, rep.residual);
      summary.all_pass = summary.all_pass && rec.pass;
      summary.records.push_back(std::move(rec));
    }
  }
  return summary;
}

TrialSummary run_necessity_trials(const TrialConfig& config) {
  TrialSummary summary;
  summary.min_residual_inconsistent = std::numeric_limits<double>::infinity();
  Rng root = Rng(config.seed).stream(0x6e656365);  // "nece"
  for (std::size_t t = 0; t < config.cases; ++t) {
    Rng rng = root.stream(t);
    const std::size_t n =
        std::max<std::size_t>(3, config.min_nodes +
                                     rng.uniform_index(config.max_nodes - config.min_nodes + 1));
    const std::size_t d =
        config.min_dim + rng.uniform_index(config.max_dim - config.min_dim + 1);
    Graph g = random_simple_graph(n, d, 0.4, rng);
    // Isolate node j so the witness matches the closed-form forced delta.
    const std::size_t j = rng.uniform_index(n);
    for (std::size_t q = 0; q < n; ++q) {
      g.adjacency.at(j, q) = 0.0;
      g.adjacency.at(q, j) = 0.0;
    }
    std::size_t k = rng.uniform_index(n);
    while (k == j) k = rng.uniform_index(n);
    gnn::LinearGnn model = random_model(d, 1, config.eps_lo, config.eps_hi, rng);

    const Tensor zero_delta(1, d);
    const auto probe = necessity_witness(model, g, j, k, zero_delta);
    const Tensor forced = probe.forced_delta;

    {
      auto rep = necessity_witness(model, g, j, k, forced);
      TrialRecord rec{"necessity-consistent", n, d, 1, rep.residual, true,
                      rep.consistent && rep.residual <= config.tol_consistent};
      summary.max_residual_consistent =
          std::max(summary.max_residual_consistent, rep.residual);
      summary.all_pass = summary.all_pass && rec.pass;
      summary.records.push_back(std::move(rec));
    }
    {
      Tensor off = forced;
      for (std::size_t q = 0; q < d; ++q)
        off.at(0, q) += (rng.bernoulli(0.5) ? 1.0 : -1.0) *
                        (config.delta_separation + rng.uniform(0.0, 1.0));
      auto rep = necessity_witness(model, g, j, k, off);
      TrialRecord rec{"necessity-inconsistent", n, d, 1, rep.residual, true,
                      !rep.consistent && rep.residual > config.tol_inconsistent};
      summary.min_residual_inconsistent =
          std::min(summary.min_residual_inconsistent, rep.residual);
      summary.all_pass = summary.all_pass && rec.pass;
      summary.records.push_back(std::move(rec));
    }
  }
  return summary;
}

}  // namespace leap::verify
