#include "leap/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "leap/errors.hpp"

namespace leap {

namespace {

void check_spec(const GeneratorSpec& spec) {
  if (spec.num_classes < 2) throw ConfigError("generator: need at least 2 classes");
  if (spec.graphs_per_class < 1) throw ConfigError("generator: graphs_per_class must be >= 1");
  if (spec.feature_dim < 1) throw ConfigError("generator: feature_dim must be >= 1");
  if (spec.nodes_min < 2 || spec.nodes_max < spec.nodes_min)
    throw ConfigError("generator: invalid node count range");
  if (spec.p_in <= 0.0 || spec.p_in > 1.0 || spec.p_out < 0.0 || spec.p_out > 1.0)
    throw ConfigError("generator: edge probabilities out of range");
}

// Class-conditional mean: class c shifts the feature dims congruent to c.
double class_mean(const GeneratorSpec& spec, int cls, std::size_t dim) {
  return (dim % spec.num_classes == static_cast<std::size_t>(cls)) ? spec.feature_shift
                                                                   : -spec.feature_shift;
}

Tensor sample_features(const GeneratorSpec& spec, std::size_t n, int cls, Rng& rng) {
  Tensor x(n, spec.feature_dim);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t d = 0; d < spec.feature_dim; ++d)
      x.at(i, d) = rng.normal(class_mean(spec, cls, d), spec.feature_noise);
  // Hubs carry no features of their own; their embeddings aggregate the
  // neighborhood, so they amplify the class signal instead of drowning it.
  for (std::size_t h = 0; h < std::min(spec.hubs, n); ++h)
    for (std::size_t d = 0; d < spec.feature_dim; ++d) x.at(h, d) = 0.0;
  return x;
}

Tensor sample_two_block(std::size_t n, double p_in, double p_out, Rng& rng) {
  const std::size_t half = n / 2;
  Tensor adj(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool same = (i < half) == (j < half);
      if (rng.bernoulli(same ? p_in : p_out)) {
        adj.at(i, j) = 1.0;
        adj.at(j, i) = 1.0;
      }
    }
  return adj;
}

Tensor sample_uniform(std::size_t n, double p, Rng& rng) {
  Tensor adj(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (rng.bernoulli(p)) {
        adj.at(i, j) = 1.0;
        adj.at(j, i) = 1.0;
      }
  return adj;
}

void wire_hubs(Tensor& adj, const GeneratorSpec& spec, Rng& rng) {
  const std::size_t n = adj.rows();
  const std::size_t hubs = std::min(spec.hubs, n);
  for (std::size_t h = 0; h < hubs; ++h)
    for (std::size_t v = 0; v < n; ++v) {
      if (v == h) continue;
      if (rng.bernoulli(spec.hub_degree)) {
        adj.at(h, v) = 1.0;
        adj.at(v, h) = 1.0;
      }
    }
}

// Edge probability that matches the expected density of the two-block model.
double matched_density(std::size_t n, double p_in, double p_out) {
  const double half_lo = std::floor(static_cast<double>(n) / 2.0);
  const double half_hi = static_cast<double>(n) - half_lo;
  const double within = half_lo * (half_lo - 1.0) / 2.0 + half_hi * (half_hi - 1.0) / 2.0;
  const double between = half_lo * half_hi;
  const double total = static_cast<double>(n) * (static_cast<double>(n) - 1.0) / 2.0;
  return (p_in * within + p_out * between) / total;
}

}  // namespace

std::vector<Graph> generate_synthetic_dataset(const GeneratorSpec& spec, std::uint64_t seed) {
  check_spec(spec);
  if (spec.num_classes != 2)
    throw ConfigError("generator: graph-level datasets are binary (num_classes == 2)");
  std::vector<Graph> graphs;
  graphs.reserve(2 * spec.graphs_per_class);
  Rng root(seed);
  for (int cls = 0; cls < 2; ++cls) {
    for (std::size_t g = 0; g < spec.graphs_per_class; ++g) {
      Rng rng = root.stream(static_cast<std::uint64_t>(cls) * 1000003ULL + g);
      const std::size_t n =
          spec.nodes_min + rng.uniform_index(spec.nodes_max - spec.nodes_min + 1);
      Tensor adj = cls == 0
                       ? sample_two_block(n, spec.p_in, spec.p_out, rng)
                       : sample_uniform(n, matched_density(n, spec.p_in, spec.p_out), rng);
      wire_hubs(adj, spec, rng);
      Tensor x = sample_features(spec, n, cls, rng);
      graphs.push_back(make_graph(std::move(adj), std::move(x), cls));
    }
  }
  return graphs;
}

Graph generate_node_task_graph(const GeneratorSpec& spec, std::uint64_t seed) {
  check_spec(spec);
  const std::size_t n = spec.node_task_nodes;
  if (n < 2 * spec.num_classes) throw ConfigError("generator: node_task_nodes too small");
  Rng rng = Rng(seed).stream(0x6e6f6465);  // "node"
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i)
    labels[i] = static_cast<int>(i * spec.num_classes / n);
  Tensor adj(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (rng.bernoulli(labels[i] == labels[j] ? spec.p_in : spec.p_out)) {
        adj.at(i, j) = 1.0;
        adj.at(j, i) = 1.0;
      }
  Tensor x(n, spec.feature_dim);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t d = 0; d < spec.feature_dim; ++d)
      x.at(i, d) = rng.normal(class_mean(spec, labels[i], d), spec.feature_noise);
  return make_graph(std::move(adj), std::move(x), std::nullopt, std::move(labels));
}

DatasetSplit split_dataset(std::size_t count, const std::vector<double>& ratios,
                           std::uint64_t seed) {
  if (ratios.size() != 3) throw ConfigError("split: expected 3 ratios (train/val/test)");
  const double total = std::accumulate(ratios.begin(), ratios.end(), 0.0);
  if (std::fabs(total - 1.0) > 1e-9) throw ConfigError("split: ratios must sum to 1");
  if (count == 0) throw ConfigError("split: empty dataset");

  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), 0);
  Rng rng = Rng(seed).stream(0x73706c69);  // "spli"
  rng.shuffle(order);

  // Largest-remainder apportionment keeps every part within one item of its
  // requested share.
  std::array<std::size_t, 3> sizes{};
  std::array<double, 3> frac{};
  std::size_t assigned = 0;
  for (int k = 0; k < 3; ++k) {
    const double want = ratios[k] * static_cast<double>(count);
    sizes[k] = static_cast<std::size_t>(std::floor(want));
    frac[k] = want - std::floor(want);
    assigned += sizes[k];
  }
  std::array<int, 3> by_frac{0, 1, 2};
  std::stable_sort(by_frac.begin(), by_frac.end(), [&](int a, int b) { return frac[a] > frac[b]; });
  for (int k = 0; assigned < count; ++k, ++assigned) sizes[by_frac[k % 3]] += 1;

  DatasetSplit split;
  split.seed = seed;
  auto it = order.begin();
  split.train.assign(it, it + static_cast<long>(sizes[0]));
  it += static_cast<long>(sizes[0]);
  split.val.assign(it, it + static_cast<long>(sizes[1]));
  it += static_cast<long>(sizes[1]);
  split.test.assign(it, order.end());
  return split;
}

std::vector<std::size_t> few_shot(const std::vector<std::size_t>& train,
                                  const std::vector<int>& labels, std::size_t shots,
                                  std::uint64_t seed) {
  if (shots > train.size())
    throw ConfigError("few_shot: shots (" + std::to_string(shots) + ") exceed train size (" +
                      std::to_string(train.size()) + ")");
  if (shots == train.size()) return train;
  if (labels.size() != train.size()) throw ConfigError("few_shot: labels/train size mismatch");

  std::map<int, std::vector<std::size_t>> by_class;  // label -> positions in `train`
  for (std::size_t i = 0; i < train.size(); ++i) by_class[labels[i]].push_back(i);

  Rng rng = Rng(seed).stream(0x73686f74);  // "shot"
  for (auto& [cls, members] : by_class) rng.shuffle(members);

  // Round-robin over classes so the sample stays stratified; classes that run
  // out simply stop contributing.
  std::vector<std::size_t> picked;
  std::size_t round = 0;
  while (picked.size() < shots) {
    bool any = false;
    for (auto& [cls, members] : by_class) {
      if (round < members.size() && picked.size() < shots) {
        picked.push_back(train[members[round]]);
        any = true;
      }
    }
    if (!any) break;
    ++round;
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

}  // namespace leap
