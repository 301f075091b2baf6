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

#include "tensor.h"

#include <cmath>
#include <sstream>
#include <utility>

#include "error.h"

namespace agv {

size_t ShapeProduct(const std::vector<size_t>& shape) {
  size_t n = 1;
  for (size_t d : shape) n *= d;
  return n;
}

Tensor::Tensor(std::vector<size_t> shape, double fill)
    : shape_(std::move(shape)), data_(ShapeProduct(shape_), fill) {}

Tensor::Tensor(std::vector<size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != ShapeProduct(shape_)) {
    throw Error(ErrorCode::kShapeMismatch,
                "data length " + std::to_string(data_.size()) +
                    " does not match shape " + ShapeString());
  }
}

Tensor Tensor::Vector(std::vector<double> values) {
  size_t n = values.size();
  return Tensor({n}, std::move(values));
}

bool Tensor::AllFinite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::string Tensor::ShapeString() const {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < shape_.size(); ++i) {
    if (i) os << "x";
    os << shape_[i];
  }
  os << "]";
  return os.str();
}

void RequireMatrix(const Tensor& t, const char* what, size_t cols) {
  if (t.rank() != 2 || (cols != 0 && t.cols() != cols)) {
    throw Error(ErrorCode::kShapeMismatch,
                std::string(what) + " has shape " + t.ShapeString() +
                    (cols ? ", expected " + std::to_string(cols) + " columns"
                          : ", expected a matrix"));
  }
}

Tensor MatMul(const Tensor& a, const Tensor& b) {
  RequireMatrix(a, "lhs");
  RequireMatrix(b, "rhs");
  if (b.rows() != a.cols())
    throw Error(ErrorCode::kShapeMismatch,
                "matmul " + a.ShapeString() + " by " + b.ShapeString());
  Tensor out = Tensor::Matrix(a.rows(), b.cols());
  for (size_t i = 0; i < a.rows(); ++i) {
    auto out_row = out.row(i);
    for (size_t k = 0; k < a.cols(); ++k) {
      double aik = a(i, k);
      if (aik == 0.0) continue;
      auto b_row = b.row(k);
      for (size_t j = 0; j < b.cols(); ++j) out_row[j] += aik * b_row[j];
    }
  }
  return out;
}

Tensor Transpose(const Tensor& a) {
  RequireMatrix(a, "transpose input");
  Tensor out = Tensor::Matrix(a.cols(), a.rows());
  for (size_t i = 0; i < a.rows(); ++i)
    for (size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

Tensor RowMean(const Tensor& a) {
  RequireMatrix(a, "mean input");
  if (a.rows() == 0) throw Error(ErrorCode::kShapeMismatch, "mean over zero rows");
  Tensor out = Tensor::Matrix(1, a.cols());
  for (size_t t = 0; t < a.rows(); ++t)
    for (size_t j = 0; j < a.cols(); ++j) out(0, j) += a(t, j);
  for (size_t j = 0; j < a.cols(); ++j) out(0, j) /= static_cast<double>(a.rows());
  return out;
}

Tensor ConcatCols(const std::vector<const Tensor*>& parts) {
  if (parts.empty()) throw Error(ErrorCode::kShapeMismatch, "nothing to concatenate");
  size_t rows = parts.front()->rows();
  size_t cols = 0;
  for (const Tensor* p : parts) {
    RequireMatrix(*p, "concat part");
    if (p->rows() != rows)
      throw Error(ErrorCode::kShapeMismatch, "concat parts disagree on row count");
    cols += p->cols();
  }
  Tensor out = Tensor::Matrix(rows, cols);
  for (size_t t = 0; t < rows; ++t) {
    size_t offset = 0;
    for (const Tensor* p : parts) {
      for (size_t j = 0; j < p->cols(); ++j) out(t, offset + j) = (*p)(t, j);
      offset += p->cols();
    }
  }
  return out;
}

Tensor SliceCols(const Tensor& a, size_t begin, size_t count) {
  RequireMatrix(a, "slice input");
  if (begin + count > a.cols())
    throw Error(ErrorCode::kShapeMismatch, "column slice out of range");
  Tensor out = Tensor::Matrix(a.rows(), count);
  for (size_t t = 0; t < a.rows(); ++t)
    for (size_t j = 0; j < count; ++j) out(t, j) = a(t, begin + j);
  return out;
}

Tensor SliceRows(const Tensor& a, size_t begin, size_t count) {
  RequireMatrix(a, "slice input");
  if (begin + count > a.rows())
    throw Error(ErrorCode::kShapeMismatch, "row slice out of range");
  std::vector<double> data(a.data().begin() + begin * a.cols(),
                           a.data().begin() + (begin + count) * a.cols());
  return Tensor({count, a.cols()}, std::move(data));
}

void AddInPlace(Tensor* acc, const Tensor& x) {
  if (acc->shape() != x.shape())
    throw Error(ErrorCode::kShapeMismatch,
                "add: " + acc->ShapeString() + " vs " + x.ShapeString());
  for (size_t i = 0; i < x.size(); ++i) (*acc)[i] += x[i];
}

}  // namespace agv
