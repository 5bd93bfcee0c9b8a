#pragma once

#include <vector>

#include "leap/tensor.hpp"

namespace leap::la {

struct SquareSolve {
  Tensor solution;
  bool invertible = false;
};

// Solve A X = B for square A (LU with full pivoting). When A is judged
// singular the solution falls back to the minimum-norm least-squares answer
// and `invertible` is false.
SquareSolve solve_square(const Tensor& a, const Tensor& b);

// Minimum-norm least-squares solution of A X = B via SVD.
Tensor lstsq_min_norm(const Tensor& a, const Tensor& b);

// Singular values in descending order.
std::vector<double> singular_values(const Tensor& a);

// max-abs entry of A X - B.
double system_residual(const Tensor& a, const Tensor& x, const Tensor& b);

// ratio of largest to smallest singular value (inf when singular).
double condition_number(const Tensor& a);

}  // namespace leap::la
