#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "leap/ad/grad_check.hpp"
#include "leap/errors.hpp"
#include "leap/prompt.hpp"
#include "leap/rng.hpp"

using namespace leap;

namespace {
Tensor random_tensor(std::size_t r, std::size_t c, Rng& rng) {
  Tensor t(r, c);
  for (double& v : t.data()) v = rng.normal();
  return t;
}
}  // namespace

TEST_CASE("attentive_prompts: k = 1 collapses to the single basis row, exactly") {
  Rng rng(1);
  PromptBasis basis = PromptBasis::make(1, 4, rng);
  Tensor x = random_tensor(6, 4, rng);
  const Tensor p = attentive_prompts(x, basis);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      CHECK(p.at(i, j) == basis.basis.value.at(0, j));  // exact
}

TEST_CASE("attentive_prompts: identical projections give node-identical prompts, exactly") {
  Rng rng(2);
  PromptBasis basis = PromptBasis::make(5, 3, rng);
  for (std::size_t j = 0; j < 5; ++j)
    for (std::size_t d = 0; d < 3; ++d)
      basis.projections.value.at(j, d) = basis.projections.value.at(0, d);
  Tensor x = random_tensor(7, 3, rng);
  const Tensor p = attentive_prompts(x, basis);
  // every node row equals the uniform mixture of the basis rows
  for (std::size_t i = 1; i < 7; ++i)
    for (std::size_t d = 0; d < 3; ++d) CHECK(p.at(i, d) == p.at(0, d));
}

TEST_CASE("attentive_prompts: two-basis scalar softmax oracle") {
  Rng rng(3);
  PromptBasis basis = PromptBasis::make(2, 2, rng);
  basis.projections.value = Tensor::from_rows({{1.0, 0.0}, {-1.0, 0.0}});
  basis.basis.value = Tensor::from_rows({{1.0, 0.0}, {0.0, 1.0}});
  Tensor x = Tensor::from_rows({{1.0, 0.0}});
  const Tensor p = attentive_prompts(x, basis);
  const double a1 = std::exp(1.0) / (std::exp(1.0) + std::exp(-1.0));
  CHECK(a1 == doctest::Approx(0.8808).epsilon(1e-4));
  CHECK(p.at(0, 0) == doctest::Approx(a1).epsilon(1e-12));
  CHECK(p.at(0, 1) == doctest::Approx(1.0 - a1).epsilon(1e-12));
}

TEST_CASE("attentive_prompts: rows are convex combinations of basis rows") {
  Rng rng(4);
  PromptBasis basis = PromptBasis::make(4, 3, rng);
  for (double& v : basis.basis.value.data()) v = rng.uniform(-2.0, 2.0);
  for (double& v : basis.projections.value.data()) v = rng.uniform(-2.0, 2.0);
  Tensor x = random_tensor(10, 3, rng);
  const Tensor p = attentive_prompts(x, basis);
  // inside the bounding box of the basis rows (necessary for convex hull)
  for (std::size_t d = 0; d < 3; ++d) {
    double lo = basis.basis.value.at(0, d), hi = lo;
    for (std::size_t j = 1; j < 4; ++j) {
      lo = std::min(lo, basis.basis.value.at(j, d));
      hi = std::max(hi, basis.basis.value.at(j, d));
    }
    for (std::size_t i = 0; i < 10; ++i) {
      CHECK(p.at(i, d) >= lo - 1e-12);
      CHECK(p.at(i, d) <= hi + 1e-12);
    }
  }
}

TEST_CASE("attentive_prompts: gradient check on basis and projections") {
  Rng rng(5);
  PromptBasis basis = PromptBasis::make(3, 4, rng);
  Tensor x = random_tensor(5, 4, rng);
  auto build = [&](ad::Tape& tape) {
    auto p = attentive_prompts(tape, x, basis);
    return tape.sum(tape.mul(p, p));
  };
  CHECK(ad::grad_check(build, basis.params(), 1e-5) <= 1e-4);
}

TEST_CASE("apply_prompt: zero, inverse, entrywise oracle") {
  Rng rng(6);
  Tensor x = random_tensor(4, 3, rng);
  CHECK(apply_prompt(x, Tensor(4, 3)) == x);
  Tensor p = random_tensor(4, 3, rng);
  CHECK(max_abs_diff(apply_prompt(apply_prompt(x, p), scale(p, -1.0)), x) <= 1e-15);
  const Tensor sum = apply_prompt(x, p);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      CHECK(sum.at(i, j) == x.at(i, j) + p.at(i, j));
  CHECK_THROWS_AS(apply_prompt(x, Tensor(3, 3)), ShapeError);
}

TEST_CASE("edit: counts, zero deltas, inverse pairs, replay oracle") {
  Rng rng(7);
  PromptState st = PromptState::init(Tensor(5, 3));
  const Tensor before = st.prompts;
  edit(st, 2, Tensor(1, 3));
  CHECK(st.prompts == before);
  CHECK(st.counts[2] == 1);
  CHECK(st.step == 1);

  Tensor v = random_tensor(1, 3, rng);
  edit(st, 2, v);
  edit(st, 2, scale(v, -1.0));
  CHECK(max_abs_diff(st.prompts, before) <= 1e-15);
  CHECK(st.counts[2] == 3);

  // replay-sum oracle over a random edit sequence
  PromptState replay = PromptState::init(random_tensor(6, 2, rng));
  const Tensor initial = replay.prompts;
  Tensor per_node_sum(6, 2);
  for (int t = 0; t < 40; ++t) {
    const std::size_t node = rng.uniform_index(6);
    Tensor delta = random_tensor(1, 2, rng);
    edit(replay, node, delta);
    for (std::size_t d = 0; d < 2; ++d) per_node_sum.at(node, d) += delta.at(0, d);
  }
  CHECK(max_abs_diff(replay.prompts, add(initial, per_node_sum)) <= 1e-12);
  CHECK(replay.step == 40);

  CHECK_THROWS_AS(edit(replay, 6, Tensor(1, 2)), IndexError);
}

TEST_CASE("ecr: formula, monotonicity, full coverage") {
  CHECK(ecr({0, 0, 0}) == 0.0);
  CHECK(ecr({1, 2, 0, 4}) == 0.75);

  Rng rng(8);
  PromptState st = PromptState::init(Tensor(7, 2));
  double last = 0.0;
  std::size_t edited = 0;
  for (int t = 0; t < 30; ++t) {
    edit(st, rng.uniform_index(7), Tensor(1, 2));
    const double now = ecr(st.counts);
    CHECK(now >= last);
    CHECK(now >= 0.0);
    CHECK(now <= 1.0);
    last = now;
    edited = 0;
    for (long c : st.counts) edited += c != 0 ? 1 : 0;
    CHECK((now == 1.0) == (edited == 7));
  }
  // touch every node -> exactly 1
  PromptState full = PromptState::init(Tensor(4, 1));
  for (std::size_t i = 0; i < 4; ++i) edit(full, i, Tensor(1, 1));
  CHECK(ecr(full.counts) == 1.0);
}
