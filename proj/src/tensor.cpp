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

#include "crg/tensor.hpp"

#include <functional>
#include <numeric>
#include <sstream>
#include <utility>

namespace crg {

std::size_t numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape)
    : shape_(std::move(shape)), data_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(numel(shape_)))) {}

Tensor::Tensor(Shape shape, Eigen::VectorXd data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (numel(shape_) != static_cast<std::size_t>(data_.size())) {
    throw ShapeError("tensor: shape " + to_string(shape_) + " does not match " +
                     std::to_string(data_.size()) + " elements");
  }
}

Tensor::Tensor(Shape shape, std::initializer_list<double> values)
    : Tensor(std::move(shape), Eigen::Map<const Eigen::VectorXd>(values.begin(),
                                                                 static_cast<Eigen::Index>(values.size()))) {}

Tensor Tensor::scalar(double value) { return Tensor({}, {value}); }

Tensor Tensor::vector(std::initializer_list<double> values) { return Tensor({values.size()}, values); }

Tensor Tensor::vector(const Eigen::VectorXd& values) {
  return Tensor({static_cast<std::size_t>(values.size())}, values);
}

Tensor Tensor::filled(Shape shape, double value) {
  const auto n = static_cast<Eigen::Index>(numel(shape));
  return Tensor(std::move(shape), Eigen::VectorXd::Constant(n, value));
}

double Tensor::item() const {
  if (size() != 1) {
    throw ShapeError("tensor: item() on tensor of shape " + to_string(shape_));
  }
  return data_[0];
}

Eigen::Map<const RowMatrix> Tensor::matrix(std::size_t rows, std::size_t cols) const {
  if (rows * cols != size()) {
    throw ShapeError("tensor: cannot view " + to_string(shape_) + " as " + std::to_string(rows) + "x" +
                     std::to_string(cols));
  }
  return {data_.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)};
}

Eigen::Map<RowMatrix> Tensor::matrix(std::size_t rows, std::size_t cols) {
  if (rows * cols != size()) {
    throw ShapeError("tensor: cannot view " + to_string(shape_) + " as " + std::to_string(rows) + "x" +
                     std::to_string(cols));
  }
  return {data_.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)};
}

Tensor Tensor::reshaped(Shape shape) const {
  if (numel(shape) != size()) {
    throw ShapeError("tensor: cannot reshape " + to_string(shape_) + " to " + to_string(shape));
  }
  return Tensor(std::move(shape), data_);
}

}  // namespace crg
