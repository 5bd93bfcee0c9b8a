#pragma once

#include <functional>
#include <string>
#include <vector>

#include "leap/rng.hpp"
#include "leap/tensor.hpp"

namespace leap::ad {

// A named trainable tensor. `grad` accumulates across backward passes until
// the optimizer clears it. Frozen parameters still pass gradients through to
// their inputs but never receive gradient themselves.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  bool frozen = false;

  Parameter() = default;
  Parameter(std::string n, Tensor v)
      : name(std::move(n)), value(std::move(v)), grad(value.shape(), 0.0) {}
};

// Reverse-mode tape over dense tensors. One tape per forward pass, confined
// to a single thread. Primitives record a backward closure; backward() visits
// them in exact reverse execution order. Every primitive checks its output
// for non-finite entries and throws NumericError on violation.
class Tape {
 public:
  struct Val {
    int id = -1;
    bool valid() const { return id >= 0; }
  };

  Val constant(Tensor t);
  Val param(Parameter& p);

  Val matmul(Val a, Val b);
  Val add(Val a, Val b);
  Val sub(Val a, Val b);
  Val mul(Val a, Val b);       // elementwise
  Val minimum(Val a, Val b);   // elementwise; ties route gradient to `a`
  Val affine(Val a, double mult, double shift);  // mult * a + shift
  Val add_bias(Val m, Val bias);                 // rows of m + 1 x C bias
  Val relu(Val a);
  Val sigmoid(Val a);
  Val exp(Val a);
  Val log(Val a);
  Val row_softmax(Val a);
  Val transpose(Val a);
  Val mean(Val a);             // scalar mean over all entries
  Val sum(Val a);              // scalar sum over all entries
  Val sum_rows(Val a);         // column sums -> 1 x C
  Val concat_rows(Val a, Val b);
  Val clamp(Val a, double lo, double hi);
  Val dropout(Val a, double rate, Rng& rng);     // inverted dropout
  Val pick(Val a, std::size_t flat_index);       // -> 1 x 1
  Val pick_row(Val a, std::size_t row);          // -> 1 x C
  Val slice_rows(Val a, std::size_t start, std::size_t count);  // -> count x C

  // Fused losses.
  Val bce(Val probabilities, const std::vector<double>& labels);
  Val cross_entropy(Val logits, const std::vector<int>& labels);
  Val mse(Val pred, Val target);

  // Seeds d(out)/d(out) = 1; out must be scalar. Flushes gradients into the
  // bound, non-frozen Parameters.
  void backward(Val out);
  // Test hook: arbitrary upstream seed.
  void backward_with_seed(Val out, const Tensor& seed);

  const Tensor& value(Val v) const { return nodes_[v.id].value; }
  const Tensor& grad(Val v) const { return nodes_[v.id].grad; }
  std::size_t num_nodes() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    std::function<void()> back;  // empty for leaves
    Parameter* bound = nullptr;
  };

  Val push(Tensor value, std::function<void()> back, const char* op);
  Tensor& g(Val v) { return nodes_[v.id].grad; }
  const Tensor& v(Val v) const { return nodes_[v.id].value; }
  void check(Val a) const;

  std::vector<Node> nodes_;
};

using Val = Tape::Val;

}  // namespace leap::ad
