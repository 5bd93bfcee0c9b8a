#include "leap/linalg.hpp"

#include <Eigen/Dense>
#include <limits>

#include "leap/errors.hpp"

namespace leap::la {

namespace {

Eigen::MatrixXd to_eigen(const Tensor& t) {
  Eigen::MatrixXd m(t.rows(), t.cols());
  for (std::size_t i = 0; i < t.rows(); ++i)
    for (std::size_t j = 0; j < t.cols(); ++j) m(static_cast<long>(i), static_cast<long>(j)) = t.at(i, j);
  return m;
}

Tensor from_eigen(const Eigen::MatrixXd& m) {
  Tensor t(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
  for (long i = 0; i < m.rows(); ++i)
    for (long j = 0; j < m.cols(); ++j) t.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = m(i, j);
  return t;
}

}  // namespace

SquareSolve solve_square(const Tensor& a, const Tensor& b) {
  if (a.rows() != a.cols())
    throw ShapeError("solve_square: matrix " + a.shape_str() + " is not square");
  if (a.rows() != b.rows())
    throw ShapeError("solve_square: rhs " + b.shape_str() + " does not match " + a.shape_str());
  const Eigen::MatrixXd ea = to_eigen(a);
  const Eigen::MatrixXd eb = to_eigen(b);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(ea);
  SquareSolve out;
  out.invertible = lu.isInvertible();
  if (out.invertible) {
    Eigen::MatrixXd x = lu.solve(eb);
    // One step of iterative refinement keeps residuals near machine epsilon
    // even for moderately conditioned systems.
    x += lu.solve(eb - ea * x);
    out.solution = from_eigen(x);
  } else {
    out.solution = lstsq_min_norm(a, b);
  }
  return out;
}

Tensor lstsq_min_norm(const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows())
    throw ShapeError("lstsq: rhs " + b.shape_str() + " does not match " + a.shape_str());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(a),
                                        Eigen::ComputeThinU | Eigen::ComputeThinV);
  return from_eigen(svd.solve(to_eigen(b)));
}

std::vector<double> singular_values(const Tensor& a) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(a));
  std::vector<double> out;
  for (long i = 0; i < svd.singularValues().size(); ++i)
    out.push_back(svd.singularValues()(i));
  return out;
}

double system_residual(const Tensor& a, const Tensor& x, const Tensor& b) {
  return max_abs_diff(matmul(a, x), b);
}

double condition_number(const Tensor& a) {
  const auto sv = singular_values(a);
  if (sv.empty() || sv.back() == 0.0) return std::numeric_limits<double>::infinity();
  return sv.front() / sv.back();
}

}  // namespace leap::la
