#pragma once

#include <unordered_map>
#include <vector>

#include "leap/ad/tape.hpp"

namespace leap::ad {

// Plain SGD with optional weight decay and momentum.
class Sgd {
 public:
  explicit Sgd(double lr, double weight_decay = 0.0, double momentum = 0.0)
      : lr_(lr), weight_decay_(weight_decay), momentum_(momentum) {}

  // Applies one update and clears the gradients. Throws FrozenModelError when
  // asked to update a frozen parameter.
  void step(const std::vector<Parameter*>& params);

  static void zero_grad(const std::vector<Parameter*>& params);

  double lr() const { return lr_; }
  void set_lr(double lr) { lr_ = lr; }

 private:
  double lr_;
  double weight_decay_;
  double momentum_;
  std::unordered_map<Parameter*, Tensor> velocity_;
};

}  // namespace leap::ad
