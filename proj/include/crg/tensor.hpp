// Copyright 2026 The CRG Explainer Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CRG_TENSOR_HPP
#define CRG_TENSOR_HPP

#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace crg {

using Shape = std::vector<std::size_t>;

/// Row-major dense matrix; the layout every flat buffer in this library uses.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Raised when operand shapes are inconsistent.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a value that must be finite is not.
class NonFiniteError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

std::size_t numel(const Shape& shape);
std::string to_string(const Shape& shape);

/// Dense n-dimensional array of doubles in row-major order.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape);
  Tensor(Shape shape, Eigen::VectorXd data);
  Tensor(Shape shape, std::initializer_list<double> values);

  static Tensor scalar(double value);
  static Tensor vector(std::initializer_list<double> values);
  static Tensor vector(const Eigen::VectorXd& values);
  static Tensor filled(Shape shape, double value);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return static_cast<std::size_t>(data_.size()); }

  const Eigen::VectorXd& data() const { return data_; }
  Eigen::VectorXd& data() { return data_; }

  double operator[](std::size_t i) const { return data_[static_cast<Eigen::Index>(i)]; }
  double& operator[](std::size_t i) { return data_[static_cast<Eigen::Index>(i)]; }

  /// Value of a single-element tensor.
  double item() const;

  /// View as a rows x cols row-major matrix; rows * cols must equal size().
  Eigen::Map<const RowMatrix> matrix(std::size_t rows, std::size_t cols) const;
  Eigen::Map<RowMatrix> matrix(std::size_t rows, std::size_t cols);

  Tensor reshaped(Shape shape) const;
  bool all_finite() const { return data_.allFinite(); }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  Shape shape_;
  Eigen::VectorXd data_;
};

}  // namespace crg

#endif  // CRG_TENSOR_HPP
