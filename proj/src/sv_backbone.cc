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

#include "sv_backbone.h"

#include <algorithm>
#include <cmath>

#include "error.h"

namespace agv {
namespace {

constexpr double kVarianceFloor = 1e-9;

ConvView ConvFromStore(const ParamStore& store, const std::string& prefix) {
  return {store.Get(prefix + ".weight"), store.Get(prefix + ".bias")};
}

}  // namespace

Res2Params Res2Params::FromStore(const ParamStore& store, const std::string& prefix,
                                 int scale) {
  std::vector<ConvView> groups;
  for (int g = 2; g <= scale; ++g)
    groups.push_back(ConvFromStore(store, prefix + ".res2.conv" + std::to_string(g)));
  return Res2Params{ConvFromStore(store, prefix + ".conv_in"), std::move(groups),
                    ConvFromStore(store, prefix + ".conv_out"),
                    SeParams{store.Affine(prefix + ".se.fc1"),
                             store.Affine(prefix + ".se.fc2")}};
}

Tensor SeBlock(const Tensor& x, const SeParams& params) {
  RequireMatrix(x, "SE input");
  Tensor squeeze = RowMean(x);
  Tensor hidden = Affine(squeeze, params.fc1);
  ReluInPlace(&hidden);
  Tensor excite = Affine(hidden, params.fc2);
  if (excite.cols() != x.cols())
    throw Error(ErrorCode::kShapeMismatch, "SE output width differs from input");
  Tensor y = x;
  for (size_t c = 0; c < x.cols(); ++c) {
    const double gate = Sigmoid(excite(0, c));
    for (size_t t = 0; t < x.rows(); ++t) y(t, c) *= gate;
  }
  return y;
}

Tensor Res2Block(const Tensor& x, int dilation, int scale, const Res2Params& params) {
  RequireMatrix(x, "Res2 input");
  const size_t channels = x.cols();
  if (scale < 2 || channels % static_cast<size_t>(scale) != 0)
    throw Error(ErrorCode::kIndivisibleScale, std::to_string(channels) + " channels into " +
                                                  std::to_string(scale) + " groups");
  if (params.group_convs.size() != static_cast<size_t>(scale - 1))
    throw Error(ErrorCode::kShapeMismatch, "Res2 block needs scale - 1 group convs");
  const size_t width = channels / static_cast<size_t>(scale);

  const Tensor inner = Conv1d(x, params.conv_in.weight, params.conv_in.bias);
  std::vector<Tensor> outs;
  outs.reserve(static_cast<size_t>(scale));
  outs.push_back(SliceCols(inner, 0, width));
  for (size_t g = 1; g < static_cast<size_t>(scale); ++g) {
    Tensor in = SliceCols(inner, g * width, width);
    AddInPlace(&in, outs.back());
    const ConvView& conv = params.group_convs[g - 1];
    Tensor y = Conv1d(in, conv.weight, conv.bias, dilation);
    ReluInPlace(&y);
    outs.push_back(std::move(y));
  }
  std::vector<const Tensor*> parts;
  for (const Tensor& t : outs) parts.push_back(&t);
  const Tensor merged = ConcatCols(parts);
  Tensor out = SeBlock(Conv1d(merged, params.conv_out.weight, params.conv_out.bias), params.se);
  AddInPlace(&out, x);
  return out;
}

Tensor AttentiveStatsPooling(const Tensor& h, const PoolingParams& params) {
  RequireMatrix(h, "pooling input");
  if (h.rows() == 0) throw Error(ErrorCode::kShapeMismatch, "pooling over zero frames");
  const size_t frames = h.rows(), channels = h.cols();
  Tensor hidden = Affine(h, params.fc1);
  TanhInPlace(&hidden);
  const Tensor logits = Affine(hidden, params.fc2);
  if (logits.cols() != channels)
    throw Error(ErrorCode::kShapeMismatch, "pooling logits width differs from channels");

  Tensor stats({2 * channels});
  for (size_t c = 0; c < channels; ++c) {
    double peak = logits(0, c);
    for (size_t t = 1; t < frames; ++t) peak = std::max(peak, logits(t, c));
    double total = 0.0;
    for (size_t t = 0; t < frames; ++t) total += std::exp(logits(t, c) - peak);
    double mean = 0.0, second = 0.0;
    for (size_t t = 0; t < frames; ++t) {
      const double alpha = std::exp(logits(t, c) - peak) / total;
      mean += alpha * h(t, c);
      second += alpha * h(t, c) * h(t, c);
    }
    stats[c] = mean;
    stats[channels + c] = std::sqrt(std::max(second - mean * mean, kVarianceFloor));
  }
  return stats;
}

BackboneOutput BackboneForward(const MelSpectrogram& mel, const ParamStore& params,
                               const BackboneConfig& config) {
  RequireMatrix(mel.frames, "mel frames", static_cast<size_t>(config.in_dim));
  if (mel.frames.rows() == 0) throw Error(ErrorCode::kTooShort, "mel has no frames");

  Tensor x = Conv1d(mel.frames, params.Get("backbone.input.weight"),
                    params.Get("backbone.input.bias"));
  ReluInPlace(&x);

  std::vector<Tensor> blocks;
  for (int i = 0; i < config.n_blocks(); ++i) {
    const std::string prefix = "backbone.block" + std::to_string(i + 1);
    const Res2Params p = Res2Params::FromStore(params, prefix, config.scale);
    x = Res2Block(x, config.dilations[static_cast<size_t>(i)], config.scale, p);
    blocks.push_back(x);
  }
  std::vector<const Tensor*> parts;
  for (const Tensor& b : blocks) parts.push_back(&b);
  const Tensor frames = Conv1d(ConcatCols(parts), params.Get("backbone.mfa.weight"),
                               params.Get("backbone.mfa.bias"));

  BackboneOutput out;
  out.frame_states = Affine(frames, params.Affine("backbone.frame_proj"));
  const Tensor stats = AttentiveStatsPooling(
      frames, {params.Affine("backbone.pool.fc1"), params.Affine("backbone.pool.fc2")});
  const Tensor z = Affine(Tensor({1, stats.size()}, stats.values()),
                          params.Affine("backbone.pool_proj"));
  out.pooled = Tensor::Vector(z.values());
  return out;
}

}  // namespace agv
