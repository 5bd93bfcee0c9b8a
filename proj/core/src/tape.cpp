#include "leap/ad/tape.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "leap/errors.hpp"

namespace leap::ad {

namespace {
constexpr double kProbEps = 1e-7;  // probability guard for BCE / log-softmax

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b))
    throw ShapeError(std::string(op) + " shape mismatch: " + a.shape_str() + " vs " +
                     b.shape_str());
}
}  // namespace

Tape::Val Tape::push(Tensor value, std::function<void()> back, const char* op) {
  if (!value.all_finite())
    throw NumericError(std::string("non-finite values produced by ") + op);
  Node node;
  node.value = std::move(value);
  node.grad = Tensor(node.value.shape(), 0.0);
  node.back = std::move(back);
  nodes_.push_back(std::move(node));
  return Val{static_cast<int>(nodes_.size()) - 1};
}

void Tape::check(Val a) const {
  if (!a.valid() || a.id >= static_cast<int>(nodes_.size()))
    throw IndexError("tape value handle out of range");
}

Tape::Val Tape::constant(Tensor t) { return push(std::move(t), {}, "constant"); }

Tape::Val Tape::param(Parameter& p) {
  Val out = push(p.value, {}, "param");
  nodes_[out.id].bound = &p;
  return out;
}

Tape::Val Tape::matmul(Val a, Val b) {
  check(a);
  check(b);
  Tensor out = leap::matmul(v(a), v(b));
  Val r = push(std::move(out), {}, "matmul");
  nodes_[r.id].back = [this, a, b, r]() {
    const Tensor& up = g(r);
    // dA += up * B^T ; dB += A^T * up
    const Tensor bt = leap::transpose(v(b));
    const Tensor at = leap::transpose(v(a));
    Tensor da = leap::matmul(up, bt);
    Tensor db = leap::matmul(at, up);
    for (std::size_t i = 0; i < da.size(); ++i) g(a)[i] += da[i];
    for (std::size_t i = 0; i < db.size(); ++i) g(b)[i] += db[i];
  };
  return r;
}

Tape::Val Tape::add(Val a, Val b) {
  check(a);
  check(b);
  require_same_shape(v(a), v(b), "add");
  Tensor out = leap::add(v(a), v(b));
  Val r = push(std::move(out), {}, "add");
  nodes_[r.id].back = [this, a, b, r]() {
    for (std::size_t i = 0; i < g(r).size(); ++i) {
      g(a)[i] += g(r)[i];
      g(b)[i] += g(r)[i];
    }
  };
  return r;
}

Tape::Val Tape::sub(Val a, Val b) {
  check(a);
  check(b);
  require_same_shape(v(a), v(b), "sub");
  Tensor out = leap::sub(v(a), v(b));
  Val r = push(std::move(out), {}, "sub");
  nodes_[r.id].back = [this, a, b, r]() {
    for (std::size_t i = 0; i < g(r).size(); ++i) {
      g(a)[i] += g(r)[i];
      g(b)[i] -= g(r)[i];
    }
  };
  return r;
}

Tape::Val Tape::mul(Val a, Val b) {
  check(a);
  check(b);
  require_same_shape(v(a), v(b), "mul");
  Tensor out = v(a);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= v(b)[i];
  Val r = push(std::move(out), {}, "mul");
  nodes_[r.id].back = [this, a, b, r]() {
    for (std::size_t i = 0; i < g(r).size(); ++i) {
      g(a)[i] += g(r)[i] * v(b)[i];
      g(b)[i] += g(r)[i] * v(a)[i];
    }
  };
  return r;
}

Tape::Val Tape::minimum(Val a, Val b) {
  check(a);
  check(b);
  require_same_shape(v(a), v(b), "minimum");
  Tensor out = v(a);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::min(v(a)[i], v(b)[i]);
  Val r = push(std::move(out), {}, "minimum");
  nodes_[r.id].back = [this, a, b, r]() {
    for (std::size_t i = 0; i < g(r).size(); ++i) {
      if (v(a)[i] <= v(b)[i])
        g(a)[i] += g(r)[i];
      else
        g(b)[i] += g(r)[i];
    }
  };
  return r;
}

Tape::Val Tape::affine(Val a, double mult, double shift) {
  check(a);
  Tensor out = v(a);
  for (double& x : out.data()) x = mult * x + shift;
  Val r = push(std::move(out), {}, "affine");
  nodes_[r.id].back = [this, a, r, mult]() {
    for (std::size_t i = 0; i < g(r).size(); ++i) g(a)[i] += mult * g(r)[i];
  };
  return r;
}

Tape::Val Tape::add_bias(Val m, Val bias) {
  check(m);
  check(bias);
  if (v(bias).rows() != 1 || v(bias).cols() != v(m).cols())
    throw ShapeError("add_bias shape mismatch: " + v(m).shape_str() + " vs " +
                     v(bias).shape_str());
  Tensor out = v(m);
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) out.at(i, j) += v(bias).at(0, j);
  Val r = push(std::move(out), {}, "add_bias");
  nodes_[r.id].back = [this, m, bias, r]() {
    const Tensor& up = g(r);
    for (std::size_t i = 0; i < up.size(); ++i) g(m)[i] += up[i];
    for (std::size_t i = 0; i < up.rows(); ++i)
      for (std::size_t j = 0; j < up.cols(); ++j) g(bias).at(0, j) += up.at(i, j);
  };
  return r;
}

Tape::Val Tape::relu(Val a) {
  check(a);
  Tensor out = v(a);
  for (double& x : out.data()) x = std::max(0.0, x);
  Val r = push(std::move(out), {}, "relu");
  nodes_[r.id].back = [this, a, r]() {
    for (std::size_t i = 0; i < g(r).size(); ++i)
      if (v(a)[i] > 0.0) g(a)[i] += g(r)[i];
  };
  return r;
}

Tape::Val Tape::sigmoid(Val a) {
  check(a);
  Tensor out = v(a);
  for (double& x : out.data()) x = 1.0 / (1.0 + std::exp(-x));
  Val r = push(std::move(out), {}, "sigmoid");
  nodes_[r.id].back = [this, a, r]() {
    for (std::size_t i = 0; i < g(r).size(); ++i) {
      const double s = v(r)[i];
      g(a)[i] += g(r)[i] * s * (1.0 - s);
    }
  };
  return r;
}

Tape::Val Tape::exp(Val a) {
  check(a);
  Tensor out = v(a);
  for (double& x : out.data()) x = std::exp(x);
  Val r = push(std::move(out), {}, "exp");
  nodes_[r.id].back = [this, a, r]() {
    for (std::size_t i = 0; i < g(r).size(); ++i) g(a)[i] += g(r)[i] * v(r)[i];
  };
  return r;
}

Tape::Val Tape::log(Val a) {
  check(a);
  Tensor out = v(a);
  for (double& x : out.data()) x = std::log(x);
  Val r = push(std::move(out), {}, "log");
  nodes_[r.id].back = [this, a, r]() {
    for (std::size_t i = 0; i < g(r).size(); ++i) g(a)[i] += g(r)[i] / v(a)[i];
  };
  return r;
}

Tape::Val Tape::row_softmax(Val a) {
  check(a);
  Tensor out = v(a);
  for (std::size_t i = 0; i < out.rows(); ++i) {
    double mx = out.at(i, 0);
    for (std::size_t j = 1; j < out.cols(); ++j) mx = std::max(mx, out.at(i, j));
    double denom = 0.0;
    for (std::size_t j = 0; j < out.cols(); ++j) {
      out.at(i, j) = std::exp(out.at(i, j) - mx);
      denom += out.at(i, j);
    }
    for (std::size_t j = 0; j < out.cols(); ++j) out.at(i, j) /= denom;
  }
  Val r = push(std::move(out), {}, "row_softmax");
  nodes_[r.id].back = [this, a, r]() {
    // dx = y * (dy - sum_j dy_j y_j) per row
    const Tensor& y = v(r);
    const Tensor& dy = g(r);
    for (std::size_t i = 0; i < y.rows(); ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < y.cols(); ++j) dot += dy.at(i, j) * y.at(i, j);
      for (std::size_t j = 0; j < y.cols(); ++j)
        g(a).at(i, j) += y.at(i, j) * (dy.at(i, j) - dot);
    }
  };
  return r;
}

Tape::Val Tape::transpose(Val a) {
  check(a);
  Val r = push(leap::transpose(v(a)), {}, "transpose");
  nodes_[r.id].back = [this, a, r]() {
    const Tensor up = leap::transpose(g(r));
    for (std::size_t i = 0; i < up.size(); ++i) g(a)[i] += up[i];
  };
  return r;
}

Tape::Val Tape::mean(Val a) {
  check(a);
  const double n = static_cast<double>(v(a).size());
  double total = 0.0;
  for (double x : v(a).data()) total += x;
  Val r = push(Tensor::scalar(total / n), {}, "mean");
  nodes_[r.id].back = [this, a, r, n]() {
    const double up = g(r)[0] / n;
    for (std::size_t i = 0; i < g(a).size(); ++i) g(a)[i] += up;
  };
  return r;
}

Tape::Val Tape::sum(Val a) {
  check(a);
  double total = 0.0;
  for (double x : v(a).data()) total += x;
  Val r = push(Tensor::scalar(total), {}, "sum");
  nodes_[r.id].back = [this, a, r]() {
    const double up = g(r)[0];
    for (std::size_t i = 0; i < g(a).size(); ++i) g(a)[i] += up;
  };
  return r;
}

Tape::Val Tape::sum_rows(Val a) {
  check(a);
  Val r = push(leap::sum_rows(v(a)), {}, "sum_rows");
  nodes_[r.id].back = [this, a, r]() {
    const Tensor& up = g(r);
    for (std::size_t i = 0; i < v(a).rows(); ++i)
      for (std::size_t j = 0; j < v(a).cols(); ++j) g(a).at(i, j) += up.at(0, j);
  };
  return r;
}

Tape::Val Tape::concat_rows(Val a, Val b) {
  check(a);
  check(b);
  if (v(a).cols() != v(b).cols())
    throw ShapeError("concat_rows column mismatch: " + v(a).shape_str() + " vs " +
                     v(b).shape_str());
  Tensor out(v(a).rows() + v(b).rows(), v(a).cols());
  std::copy(v(a).data().begin(), v(a).data().end(), out.data().begin());
  std::copy(v(b).data().begin(), v(b).data().end(),
            out.data().begin() + static_cast<long>(v(a).size()));
  Val r = push(std::move(out), {}, "concat_rows");
  nodes_[r.id].back = [this, a, b, r]() {
    const Tensor& up = g(r);
    const std::size_t na = v(a).size();
    for (std::size_t i = 0; i < na; ++i) g(a)[i] += up[i];
    for (std::size_t i = 0; i < v(b).size(); ++i) g(b)[i] += up[na + i];
  };
  return r;
}

Tape::Val Tape::clamp(Val a, double lo, double hi) {
  check(a);
  if (lo > hi) throw ConfigError("clamp: lo > hi");
  Tensor out = v(a);
  for (double& x : out.data()) x = std::clamp(x, lo, hi);
  Val r = push(std::move(out), {}, "clamp");
  nodes_[r.id].back = [this, a, r, lo, hi]() {
    for (std::size_t i = 0; i < g(r).size(); ++i)
      if (v(a)[i] > lo && v(a)[i] < hi) g(a)[i] += g(r)[i];
  };
  return r;
}

Tape::Val Tape::dropout(Val a, double rate, Rng& rng) {
  check(a);
  if (rate < 0.0 || rate >= 1.0) throw ConfigError("dropout rate must be in [0, 1)");
  if (rate == 0.0) return affine(a, 1.0, 0.0);
  const double keep = 1.0 - rate;
  auto mask = std::make_shared<std::vector<double>>(v(a).size());
  Tensor out = v(a);
  for (std::size_t i = 0; i < out.size(); ++i) {
    (*mask)[i] = rng.bernoulli(keep) ? 1.0 / keep : 0.0;
    out[i] *= (*mask)[i];
  }
  Val r = push(std::move(out), {}, "dropout");
  nodes_[r.id].back = [this, a, r, mask]() {
    for (std::size_t i = 0; i < g(r).size(); ++i) g(a)[i] += g(r)[i] * (*mask)[i];
  };
  return r;
}

Tape::Val Tape::pick(Val a, std::size_t flat_index) {
  check(a);
  if (flat_index >= v(a).size()) throw IndexError("pick index out of range");
  Val r = push(Tensor::scalar(v(a)[flat_index]), {}, "pick");
  nodes_[r.id].back = [this, a, r, flat_index]() { g(a)[flat_index] += g(r)[0]; };
  return r;
}

Tape::Val Tape::pick_row(Val a, std::size_t row) {
  check(a);
  if (row >= v(a).rows()) throw IndexError("pick_row index out of range");
  const std::size_t c = v(a).cols();
  Tensor out(1, c);
  for (std::size_t j = 0; j < c; ++j) out.at(0, j) = v(a).at(row, j);
  Val r = push(std::move(out), {}, "pick_row");
  nodes_[r.id].back = [this, a, r, row, c]() {
    for (std::size_t j = 0; j < c; ++j) g(a).at(row, j) += g(r).at(0, j);
  };
  return r;
}

Tape::Val Tape::slice_rows(Val a, std::size_t start, std::size_t count) {
  check(a);
  if (start + count > v(a).rows()) throw IndexError("slice_rows range out of bounds");
  const std::size_t c = v(a).cols();
  Tensor out(count, c);
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t j = 0; j < c; ++j) out.at(i, j) = v(a).at(start + i, j);
  Val r = push(std::move(out), {}, "slice_rows");
  nodes_[r.id].back = [this, a, r, start, count, c]() {
    for (std::size_t i = 0; i < count; ++i)
      for (std::size_t j = 0; j < c; ++j) g(a).at(start + i, j) += g(r).at(i, j);
  };
  return r;
}

Tape::Val Tape::bce(Val probabilities, const std::vector<double>& labels) {
  check(probabilities);
  const Tensor& p = v(probabilities);
  if (p.size() != labels.size())
    throw ShapeError("bce: " + std::to_string(labels.size()) + " labels for " +
                     p.shape_str() + " probabilities");
  for (double y : labels)
    if (y != 0.0 && y != 1.0) throw LabelError("bce labels must be 0 or 1");
  const double n = static_cast<double>(p.size());
  auto clamped = std::make_shared<std::vector<double>>(p.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    (*clamped)[i] = std::clamp(p[i], kProbEps, 1.0 - kProbEps);
    loss -= labels[i] * std::log((*clamped)[i]) + (1.0 - labels[i]) * std::log(1.0 - (*clamped)[i]);
  }
  Val r = push(Tensor::scalar(loss / n), {}, "bce");
  nodes_[r.id].back = [this, probabilities, r, labels, clamped, n]() {
    const double up = g(r)[0] / n;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const double pc = (*clamped)[i];
      const double raw = v(probabilities)[i];
      if (raw > kProbEps && raw < 1.0 - kProbEps)
        g(probabilities)[i] += up * (pc - labels[i]) / (pc * (1.0 - pc));
    }
  };
  return r;
}

Tape::Val Tape::cross_entropy(Val logits, const std::vector<int>& labels) {
  check(logits);
  const Tensor& z = v(logits);
  if (z.rows() != labels.size())
    throw ShapeError("cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                     z.shape_str() + " logits");
  const std::size_t classes = z.cols();
  for (int y : labels)
    if (y < 0 || static_cast<std::size_t>(y) >= classes)
      throw LabelError("cross_entropy label " + std::to_string(y) + " out of range [0," +
                       std::to_string(classes) + ")");
  const double n = static_cast<double>(z.rows());
  auto soft = std::make_shared<Tensor>(z.rows(), z.cols());
  double loss = 0.0;
  for (std::size_t i = 0; i < z.rows(); ++i) {
    double mx = z.at(i, 0);
    for (std::size_t j = 1; j < classes; ++j) mx = std::max(mx, z.at(i, j));
    double denom = 0.0;
    for (std::size_t j = 0; j < classes; ++j) {
      soft->at(i, j) = std::exp(z.at(i, j) - mx);
      denom += soft->at(i, j);
    }
    for (std::size_t j = 0; j < classes; ++j) soft->at(i, j) /= denom;
    loss -= std::log(std::max(soft->at(i, static_cast<std::size_t>(labels[i])), kProbEps));
  }
  Val r = push(Tensor::scalar(loss / n), {}, "cross_entropy");
  nodes_[r.id].back = [this, logits, r, labels, soft, n]() {
    const double up = g(r)[0] / n;
    for (std::size_t i = 0; i < labels.size(); ++i)
      for (std::size_t j = 0; j < soft->cols(); ++j) {
        const double onehot = (static_cast<std::size_t>(labels[i]) == j) ? 1.0 : 0.0;
        g(logits).at(i, j) += up * (soft->at(i, j) - onehot);
      }
  };
  return r;
}

Tape::Val Tape::mse(Val pred, Val target) {
  check(pred);
  check(target);
  require_same_shape(v(pred), v(target), "mse");
  const double n = static_cast<double>(v(pred).size());
  double loss = 0.0;
  for (std::size_t i = 0; i < v(pred).size(); ++i) {
    const double d = v(pred)[i] - v(target)[i];
    loss += d * d;
  }
  Val r = push(Tensor::scalar(loss / n), {}, "mse");
  nodes_[r.id].back = [this, pred, target, r, n]() {
    const double up = 2.0 * g(r)[0] / n;
    for (std::size_t i = 0; i < v(pred).size(); ++i) {
      const double d = v(pred)[i] - v(target)[i];
      g(pred)[i] += up * d;
      g(target)[i] -= up * d;
    }
  };
  return r;
}

void Tape::backward(Val out) {
  check(out);
  if (v(out).size() != 1)
    throw ShapeError("backward target must be scalar, got " + v(out).shape_str());
  backward_with_seed(out, Tensor::scalar(1.0));
}

void Tape::backward_with_seed(Val out, const Tensor& seed) {
  check(out);
  require_same_shape(v(out), seed, "backward seed");
  nodes_[out.id].grad = seed;
  for (int i = out.id; i >= 0; --i)
    if (nodes_[i].back) nodes_[i].back();
  for (auto& node : nodes_) {
    if (node.bound && !node.bound->frozen) {
      for (std::size_t i = 0; i < node.grad.size(); ++i) node.bound->grad[i] += node.grad[i];
    }
  }
}

}  // namespace leap::ad
