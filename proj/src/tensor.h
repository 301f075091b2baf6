// Copyright 2026 The AGV Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef AGV_TENSOR_H_
#define AGV_TENSOR_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace agv {

// Dense row-major tensor of doubles. Sequence states are [T x d] matrices,
// convolution kernels are [C_out x C_in x k].
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<size_t> shape, double fill = 0.0);
  Tensor(std::vector<size_t> shape, std::vector<double> data);

  static Tensor Matrix(size_t rows, size_t cols, double fill = 0.0) {
    return Tensor({rows, cols}, fill);
  }
  static Tensor Vector(std::vector<double> values);

  const std::vector<size_t>& shape() const { return shape_; }
  size_t rank() const { return shape_.size(); }
  size_t dim(size_t axis) const { return shape_.at(axis); }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  // Matrix view; valid for rank 2 only.
  size_t rows() const { return shape_[0]; }
  size_t cols() const { return shape_[1]; }
  double& operator()(size_t r, size_t c) { return data_[r * shape_[1] + c]; }
  double operator()(size_t r, size_t c) const { return data_[r * shape_[1] + c]; }
  std::span<double> row(size_t r) { return {data_.data() + r * shape_[1], shape_[1]}; }
  std::span<const double> row(size_t r) const {
    return {data_.data() + r * shape_[1], shape_[1]};
  }

  double& operator[](size_t i) { return data_[i]; }
  double operator[](size_t i) const { return data_[i]; }
  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  const std::vector<double>& values() const { return data_; }

  bool AllFinite() const;
  std::string ShapeString() const;

  bool operator==(const Tensor&) const = default;

 private:
  std::vector<size_t> shape_;
  std::vector<double> data_;
};

size_t ShapeProduct(const std::vector<size_t>& shape);

// Throws ShapeMismatch unless t is a rank-2 tensor (with the given column
// count when cols != 0).
void RequireMatrix(const Tensor& t, const char* what, size_t cols = 0);

Tensor MatMul(const Tensor& a, const Tensor& b);
Tensor Transpose(const Tensor& a);
// Mean over rows: [T x d] -> [1 x d].
Tensor RowMean(const Tensor& a);
Tensor ConcatCols(const std::vector<const Tensor*>& parts);
Tensor SliceCols(const Tensor& a, size_t begin, size_t count);
Tensor SliceRows(const Tensor& a, size_t begin, size_t count);
void AddInPlace(Tensor* acc, const Tensor& x);

}  // namespace agv

#endif  // AGV_TENSOR_H_
