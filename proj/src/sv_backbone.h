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

#ifndef AGV_SV_BACKBONE_H_
#define AGV_SV_BACKBONE_H_

#include <string>
#include <vector>

#include "dsp_frontend.h"
#include "model_config.h"
#include "nn_core.h"
#include "tensor.h"
#include "weights_io.h"

namespace agv {

struct ConvView {
  const Tensor& weight;  // [C_out x C_in x k]
  const Tensor& bias;    // [C_out]
};

struct SeParams {
  AffineView fc1;  // C -> bottleneck
  AffineView fc2;  // bottleneck -> C
};

struct Res2Params {
  ConvView conv_in;
  std::vector<ConvView> group_convs;  // scale - 1 dilated k=3 convs
  ConvView conv_out;
  SeParams se;

  static Res2Params FromStore(const ParamStore& store, const std::string& prefix,
                              int scale);
};

struct PoolingParams {
  AffineView fc1;  // C -> bottleneck, tanh
  AffineView fc2;  // bottleneck -> C logits
};

struct BackboneOutput {
  Tensor frame_states;  // H_SV, [T x d_model]
  Tensor pooled;        // z, [d_model]
};

// Squeeze (temporal mean) and excitation (relu MLP, sigmoid) per channel.
Tensor SeBlock(const Tensor& x, const SeParams& params);

// 1x1 conv, hierarchical split into `scale` groups with dilated k=3 convs
// (y1 = g1, yi = relu(conv_i(gi + y(i-1)))), 1x1 conv, SE, residual add.
Tensor Res2Block(const Tensor& x, int dilation, int scale, const Res2Params& params);

// Channel-dependent attentive statistics: per-(t, c) logits from a tanh MLP,
// softmax over time per channel, weighted mean and std (variance clamped at
// 1e-9). Returns [2C] = concat(mean, std).
Tensor AttentiveStatsPooling(const Tensor& h, const PoolingParams& params);

BackboneOutput BackboneForward(const MelSpectrogram& mel, const ParamStore& params,
                               const BackboneConfig& config);

}  // namespace agv

#endif  // AGV_SV_BACKBONE_H_
