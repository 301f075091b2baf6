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

#ifndef AGV_NN_CORE_H_
#define AGV_NN_CORE_H_

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "tensor.h"

namespace agv {

// Attention logit scaling: QK^T / sqrt(d) (default) or QK^T / d.
enum class ScaleMode { kSqrt, kLinear };

struct AffineView {
  const Tensor& weight;  // [in x out]
  const Tensor& bias;    // [out]
};

struct AffineGrads {
  Tensor dx;
  Tensor dweight;
  Tensor dbias;
};

struct AttentionTrace {
  Tensor output;   // [Tq x dv]
  Tensor weights;  // [Tq x Tk], rows sum to one
  Tensor logits;   // [Tq x Tk]
  double scale = 1.0;
};

struct AttentionGrads {
  Tensor dq;
  Tensor dk;
  Tensor dv;
};

// y = xW + b.
Tensor Affine(const Tensor& x, const Tensor& weight, const Tensor& bias);
inline Tensor Affine(const Tensor& x, const AffineView& p) {
  return Affine(x, p.weight, p.bias);
}
AffineGrads AffineBackward(const Tensor& x, const Tensor& weight, const Tensor& dy);

// Same-padded (zeros) cross-correlation over time. x is [T x C_in], kernels
// [C_out x C_in x k] with k odd, bias [C_out] or empty.
Tensor Conv1d(const Tensor& x, const Tensor& kernels, const Tensor& bias, int dilation = 1);

void ReluInPlace(Tensor* x);
void TanhInPlace(Tensor* x);
double Sigmoid(double v);

Tensor SoftmaxRows(const Tensor& x);

double AttentionScale(size_t dim, ScaleMode mode);
AttentionTrace ScaledDotAttention(const Tensor& q, const Tensor& k, const Tensor& v,
                                  ScaleMode mode = ScaleMode::kSqrt);
// Gradients of sum(output * d_out) w.r.t. q, k and v.
AttentionGrads AttentionBackward(const AttentionTrace& trace, const Tensor& q,
                                 const Tensor& k, const Tensor& v, const Tensor& d_out);

struct MultiHeadParams {
  AffineView q;
  AffineView k;
  AffineView v;
  AffineView o;
};

struct MultiHeadResult {
  Tensor output;        // [Tq x d]
  Tensor head_weights;  // [heads x Tk] for a single query row
  // Kept for the backward pass.
  Tensor q_proj, k_proj, v_proj, concat;
  std::vector<AttentionTrace> heads;
};

// Per-head projections of width d/heads with sqrt scaling, concatenation and
// an output projection. Throws IndivisibleHeads when heads does not divide d.
MultiHeadResult MultiHeadAttention(const Tensor& query, const Tensor& keys,
                                   const Tensor& values, size_t heads,
                                   const MultiHeadParams& params);

struct MultiHeadGrads {
  Tensor dquery, dkeys, dvalues;
  AffineGrads q, k, v, o;
};

MultiHeadGrads MultiHeadAttentionBackward(const MultiHeadResult& fwd, const Tensor& query,
                                          const Tensor& keys, const Tensor& values,
                                          const MultiHeadParams& params,
                                          const Tensor& d_out);

// Conv producing 2C channels split into (a, b); returns a * sigmoid(b).
Tensor GluGatedConv(const Tensor& x, const Tensor& kernels, const Tensor& bias,
                    int dilation = 1);

struct GradcheckOptions {
  double step = 1e-5;
  double rel_tol = 1e-6;
  double abs_floor = 1e-8;
  // Subset of coordinates to probe; empty probes all of them.
  std::vector<size_t> coordinates;
};

struct GradcheckReport {
  // |analytic - numeric| / max(|analytic|, |numeric|, abs_floor / rel_tol);
  // at or below rel_tol means agreement to rel_tol relative or abs_floor
  // absolute.
  double worst_error = 0.0;
  size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  size_t coordinates = 0;
  bool passed = true;
};

using ScalarFunction = std::function<double(std::span<const double>)>;

// Compares an analytic gradient of f at point against central differences,
// coordinate by coordinate. Throws NonFiniteEvaluation if f misbehaves.
GradcheckReport Gradcheck(const ScalarFunction& f, std::span<const double> point,
                          std::span<const double> analytic,
                          const GradcheckOptions& options = {});

}  // namespace agv

#endif  // AGV_NN_CORE_H_
