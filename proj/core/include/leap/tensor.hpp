#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace leap {

// Dense row-major tensor of doubles. Everything in this project is rank 1 or
// rank 2; scalars are represented as {1,1}.
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::size_t rows, std::size_t cols, double fill = 0.0)
      : shape_{rows, cols}, data_(rows * cols, fill) {}
  explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
  static Tensor scalar(double v);
  static Tensor row(std::vector<double> values);
  static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor identity(std::size_t n);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t rows() const { return shape_.empty() ? 0 : shape_[0]; }
  std::size_t cols() const {
    if (shape_.size() == 2) return shape_[1];
    return shape_.size() == 1 ? shape_[0] : 0;
  }
  std::size_t size() const { return data_.size(); }
  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  std::string shape_str() const;

  double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double item() const;  // requires size() == 1

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool all_finite() const;
  double max_abs() const;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

bool operator==(const Tensor& a, const Tensor& b);

// Plain (non-autodiff) dense helpers used by the linear GNN, the theorem
// verifier and evaluation paths.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double c);
Tensor sum_rows(const Tensor& a);   // 1 x cols
Tensor mean_rows(const Tensor& a);  // 1 x cols
double max_abs_diff(const Tensor& a, const Tensor& b);

}  // namespace leap
