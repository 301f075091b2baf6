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

#include "nn_core.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "error.h"

namespace agv {
namespace {

void RequireBias(const Tensor& bias, size_t out, const char* what) {
  if (bias.size() != out)
    throw Error(ErrorCode::kShapeMismatch, std::string(what) + " bias has " +
                                               std::to_string(bias.size()) +
                                               " entries, expected " + std::to_string(out));
}

void SetCols(Tensor* dst, const Tensor& src, size_t begin) {
  for (size_t t = 0; t < src.rows(); ++t)
    for (size_t j = 0; j < src.cols(); ++j) (*dst)(t, begin + j) = src(t, j);
}

}  // namespace

Tensor Affine(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  RequireMatrix(x, "affine input");
  RequireMatrix(weight, "affine weight", 0);
  if (weight.rows() != x.cols())
    throw Error(ErrorCode::kShapeMismatch, "affine input " + x.ShapeString() +
                                               " vs weight " + weight.ShapeString());
  RequireBias(bias, weight.cols(), "affine");
  Tensor y = MatMul(x, weight);
  for (size_t t = 0; t < y.rows(); ++t)
    for (size_t j = 0; j < y.cols(); ++j) y(t, j) += bias[j];
  return y;
}

AffineGrads AffineBackward(const Tensor& x, const Tensor& weight, const Tensor& dy) {
  RequireMatrix(dy, "affine output gradient", weight.cols());
  if (dy.rows() != x.rows())
    throw Error(ErrorCode::kShapeMismatch, "affine gradient row count");
  AffineGrads g;
  g.dweight = MatMul(Transpose(x), dy);
  g.dbias = Tensor({weight.cols()});
  for (size_t t = 0; t < dy.rows(); ++t)
    for (size_t j = 0; j < dy.cols(); ++j) g.dbias[j] += dy(t, j);
  g.dx = MatMul(dy, Transpose(weight));
  return g;
}

Tensor Conv1d(const Tensor& x, const Tensor& kernels, const Tensor& bias, int dilation) {
  RequireMatrix(x, "conv input");
  if (kernels.rank() != 3 || kernels.dim(1) != x.cols())
    throw Error(ErrorCode::kShapeMismatch, "conv kernels " + kernels.ShapeString() +
                                               " vs input " + x.ShapeString());
  if (dilation < 1) throw Error(ErrorCode::kInvalidArgument, "dilation must be positive");
  const size_t c_out = kernels.dim(0), c_in = kernels.dim(1), k = kernels.dim(2);
  if (k % 2 == 0)
    throw Error(ErrorCode::kEvenKernel, "kernel width " + std::to_string(k));
  if (!bias.empty()) RequireBias(bias, c_out, "conv");

  const long frames = static_cast<long>(x.rows());
  const long half = static_cast<long>(k / 2);
  Tensor y = Tensor::Matrix(x.rows(), c_out);
  for (long t = 0; t < frames; ++t) {
    auto out = y.row(static_cast<size_t>(t));
    if (!bias.empty())
      for (size_t o = 0; o < c_out; ++o) out[o] = bias[o];
    for (size_t tap = 0; tap < k; ++tap) {
      const long src = t + (static_cast<long>(tap) - half) * dilation;
      if (src < 0 || src >= frames) continue;
      auto in = x.row(static_cast<size_t>(src));
      for (size_t o = 0; o < c_out; ++o) {
        const double* w = kernels.data().data() + o * c_in * k + tap;
        double acc = 0.0;
        for (size_t i = 0; i < c_in; ++i) acc += w[i * k] * in[i];
        out[o] += acc;
      }
    }
  }
  return y;
}

void ReluInPlace(Tensor* x) {
  for (double& v : x->data()) v = std::max(v, 0.0);
}

void TanhInPlace(Tensor* x) {
  for (double& v : x->data()) v = std::tanh(v);
}

double Sigmoid(double v) {
  if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

Tensor SoftmaxRows(const Tensor& x) {
  RequireMatrix(x, "softmax input");
  Tensor y = Tensor::Matrix(x.rows(), x.cols());
  for (size_t r = 0; r < x.rows(); ++r) {
    auto in = x.row(r);
    auto out = y.row(r);
    const double peak = *std::max_element(in.begin(), in.end());
    double total = 0.0;
    for (size_t j = 0; j < in.size(); ++j) {
      out[j] = std::exp(in[j] - peak);
      total += out[j];
    }
    for (double& v : out) v /= total;
  }
  return y;
}

double AttentionScale(size_t dim, ScaleMode mode) {
  return mode == ScaleMode::kSqrt ? std::sqrt(static_cast<double>(dim))
                                  : static_cast<double>(dim);
}

AttentionTrace ScaledDotAttention(const Tensor& q, const Tensor& k, const Tensor& v,
                                  ScaleMode mode) {
  RequireMatrix(q, "attention queries");
  RequireMatrix(k, "attention keys", q.cols());
  RequireMatrix(v, "attention values");
  if (q.cols() == 0 || k.rows() == 0 || v.rows() != k.rows())
    throw Error(ErrorCode::kShapeMismatch, "attention shapes Q" + q.ShapeString() +
                                               " K" + k.ShapeString() + " V" +
                                               v.ShapeString());
  AttentionTrace trace;
  trace.scale = AttentionScale(q.cols(), mode);
  trace.logits = MatMul(q, Transpose(k));
  for (double& s : trace.logits.data()) s /= trace.scale;
  trace.weights = SoftmaxRows(trace.logits);
  trace.output = MatMul(trace.weights, v);
  return trace;
}

AttentionGrads AttentionBackward(const AttentionTrace& trace, const Tensor& q,
                                 const Tensor& k, const Tensor& v, const Tensor& d_out) {
  RequireMatrix(d_out, "attention output gradient", v.cols());
  if (d_out.rows() != q.rows() || trace.weights.rows() != q.rows() ||
      trace.weights.cols() != k.rows())
    throw Error(ErrorCode::kShapeMismatch, "attention trace does not match inputs");

  const Tensor& p = trace.weights;
  AttentionGrads g;
  g.dv = MatMul(Transpose(p), d_out);
  const Tensor dp = MatMul(d_out, Transpose(v));
  // Row-wise softmax Jacobian: dS = P * (dP - <dP, P>).
  Tensor ds = Tensor::Matrix(p.rows(), p.cols());
  for (size_t r = 0; r < p.rows(); ++r) {
    double inner = 0.0;
    for (size_t j = 0; j < p.cols(); ++j) inner += dp(r, j) * p(r, j);
    for (size_t j = 0; j < p.cols(); ++j) ds(r, j) = p(r, j) * (dp(r, j) - inner);
  }
  for (double& s : ds.data()) s /= trace.scale;
  g.dq = MatMul(ds, k);
  g.dk = MatMul(Transpose(ds), q);
  return g;
}

MultiHeadResult MultiHeadAttention(const Tensor& query, const Tensor& keys,
                                   const Tensor& values, size_t heads,
                                   const MultiHeadParams& params) {
  RequireMatrix(query, "multi-head query");
  const size_t d = query.cols();
  if (heads == 0 || d % heads != 0)
    throw Error(ErrorCode::kIndivisibleHeads,
                std::to_string(d) + " model dims across " + std::to_string(heads) + " heads");
  RequireMatrix(keys, "multi-head keys", d);
  RequireMatrix(values, "multi-head values", d);
  if (keys.rows() != values.rows() || keys.rows() == 0)
    throw Error(ErrorCode::kShapeMismatch, "keys and values disagree on token count");

  MultiHeadResult r;
  r.q_proj = Affine(query, params.q);
  r.k_proj = Affine(keys, params.k);
  r.v_proj = Affine(values, params.v);
  const size_t width = d / heads;
  r.concat = Tensor::Matrix(query.rows(), d);
  r.head_weights = Tensor::Matrix(heads, keys.rows());
  for (size_t h = 0; h < heads; ++h) {
    AttentionTrace trace =
        ScaledDotAttention(SliceCols(r.q_proj, h * width, width),
                           SliceCols(r.k_proj, h * width, width),
                           SliceCols(r.v_proj, h * width, width), ScaleMode::kSqrt);
    SetCols(&r.concat, trace.output, h * width);
    // With several query rows, report the weights averaged over queries.
    for (size_t qi = 0; qi < trace.weights.rows(); ++qi)
      for (size_t j = 0; j < keys.rows(); ++j)
        r.head_weights(h, j) += trace.weights(qi, j) / static_cast<double>(query.rows());
    r.heads.push_back(std::move(trace));
  }
  r.output = Affine(r.concat, params.o);
  return r;
}

MultiHeadGrads MultiHeadAttentionBackward(const MultiHeadResult& fwd, const Tensor& query,
                                          const Tensor& keys, const Tensor& values,
                                          const MultiHeadParams& params,
                                          const Tensor& d_out) {
  MultiHeadGrads g;
  g.o = AffineBackward(fwd.concat, params.o.weight, d_out);
  const size_t heads = fwd.heads.size();
  const size_t d = fwd.concat.cols();
  const size_t width = d / heads;
  Tensor dq = Tensor::Matrix(fwd.q_proj.rows(), d);
  Tensor dk = Tensor::Matrix(fwd.k_proj.rows(), d);
  Tensor dv = Tensor::Matrix(fwd.v_proj.rows(), d);
  for (size_t h = 0; h < heads; ++h) {
    AttentionGrads hg = AttentionBackward(
        fwd.heads[h], SliceCols(fwd.q_proj, h * width, width),
        SliceCols(fwd.k_proj, h * width, width), SliceCols(fwd.v_proj, h * width, width),
        SliceCols(g.o.dx, h * width, width));
    SetCols(&dq, hg.dq, h * width);
    SetCols(&dk, hg.dk, h * width);
    SetCols(&dv, hg.dv, h * width);
  }
  g.q = AffineBackward(query, params.q.weight, dq);
  g.k = AffineBackward(keys, params.k.weight, dk);
  g.v = AffineBackward(values, params.v.weight, dv);
  g.dquery = g.q.dx;
  g.dkeys = g.k.dx;
  g.dvalues = g.v.dx;
  return g;
}

Tensor GluGatedConv(const Tensor& x, const Tensor& kernels, const Tensor& bias,
                    int dilation) {
  if (kernels.rank() != 3 || kernels.dim(0) % 2 != 0)
    throw Error(ErrorCode::kShapeMismatch,
                "gated conv needs an even number of output channels, got " +
                    kernels.ShapeString());
  const Tensor both = Conv1d(x, kernels, bias, dilation);
  const size_t half = both.cols() / 2;
  Tensor y = Tensor::Matrix(both.rows(), half);
  for (size_t t = 0; t < both.rows(); ++t)
    for (size_t c = 0; c < half; ++c) y(t, c) = both(t, c) * Sigmoid(both(t, half + c));
  return y;
}

GradcheckReport Gradcheck(const ScalarFunction& f, std::span<const double> point,
                          std::span<const double> analytic,
                          const GradcheckOptions& options) {
  if (analytic.size() != point.size())
    throw Error(ErrorCode::kShapeMismatch, "gradient length differs from point length");
  const double denom_floor = options.abs_floor / options.rel_tol;
  std::vector<double> probe(point.begin(), point.end());
  std::vector<size_t> order = options.coordinates;
  if (order.empty()) {
    order.resize(point.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  }
  GradcheckReport report;
  report.coordinates = order.size();
  bool first = true;
  for (size_t i : order) {
    if (i >= point.size())
      throw Error(ErrorCode::kShapeMismatch, "gradcheck coordinate out of range");
    const double saved = probe[i];
    probe[i] = saved + options.step;
    const double up = f(probe);
    probe[i] = saved - options.step;
    const double down = f(probe);
    probe[i] = saved;
    if (!std::isfinite(up) || !std::isfinite(down))
      throw Error(ErrorCode::kNonFiniteEvaluation,
                  "non-finite value perturbing coordinate " + std::to_string(i));
    const double numeric = (up - down) / (2.0 * options.step);
    const double a = analytic[i];
    const double err = std::abs(a - numeric) /
                       std::max({std::abs(a), std::abs(numeric), denom_floor});
    if (first || err > report.worst_error) {
      report.worst_error = err;
      report.worst_index = i;
      report.worst_analytic = a;
      report.worst_numeric = numeric;
      first = false;
    }
  }
  report.passed = report.worst_error <= options.rel_tol;
  return report;
}

}  // namespace agv
