#include "leap/ad/optim.hpp"

#include "leap/errors.hpp"

namespace leap::ad {

void Sgd::step(const std::vector<Parameter*>& params) {
  for (Parameter* p : params) {
    if (p->frozen)
      throw FrozenModelError("attempted update of frozen parameter '" + p->name + "'");
    if (momentum_ != 0.0) {
      auto [it, inserted] = velocity_.try_emplace(p, Tensor(p->value.shape(), 0.0));
      Tensor& vel = it->second;
      for (std::size_t i = 0; i < p->value.size(); ++i) {
        vel[i] = momentum_ * vel[i] + p->grad[i] + weight_decay_ * p->value[i];
        p->value[i] -= lr_ * vel[i];
      }
    } else {
      for (std::size_t i = 0; i < p->value.size(); ++i)
        p->value[i] -= lr_ * (p->grad[i] + weight_decay_ * p->value[i]);
    }
  }
  zero_grad(params);
}

void Sgd::zero_grad(const std::vector<Parameter*>& params) {
  for (Parameter* p : params)
    p->grad = Tensor(p->value.shape(), 0.0);
}

}  // namespace leap::ad
