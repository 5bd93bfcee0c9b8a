#include "leap/ad/grad_check.hpp"

#include <cmath>

#include "leap/errors.hpp"

namespace leap::ad {

namespace {
double evaluate(const std::function<Val(Tape&)>& build) {
  Tape tape;
  const Val out = build(tape);
  const double value = tape.value(out).item();
  if (!std::isfinite(value)) throw NumericError("grad_check: non-finite objective");
  return value;
}
}  // namespace

double grad_check(const std::function<Val(Tape&)>& build,
                  const std::vector<Parameter*>& params, double step) {
  if (step < 1e-6 || step > 1e-4)
    throw ConfigError("grad_check: step must lie in [1e-6, 1e-4]");

  std::vector<Tensor> saved_grads;
  for (Parameter* p : params) {
    saved_grads.push_back(p->grad);
    p->grad = Tensor(p->value.shape(), 0.0);
  }

  {
    Tape tape;
    const Val out = build(tape);
    if (tape.value(out).size() != 1)
      throw ShapeError("grad_check: objective must be scalar");
    tape.backward(out);
  }

  double worst = 0.0;
  for (Parameter* p : params) {
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double original = p->value[i];
      p->value[i] = original + step;
      const double plus = evaluate(build);
      p->value[i] = original - step;
      const double minus = evaluate(build);
      p->value[i] = original;

      const double fd = (plus - minus) / (2.0 * step);
      const double adg = p->grad[i];
      const double denom = std::max({1.0, std::fabs(adg), std::fabs(fd)});
      worst = std::max(worst, std::fabs(adg - fd) / denom);
    }
  }

  for (std::size_t k = 0; k < params.size(); ++k) params[k]->grad = saved_grads[k];
  return worst;
}

}  // namespace leap::ad
