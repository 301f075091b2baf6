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

#ifndef AGV_AGGREGATION_H_
#define AGV_AGGREGATION_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "audio_io.h"
#include "dsp_frontend.h"
#include "model_config.h"
#include "nn_core.h"
#include "sv_backbone.h"
#include "tensor.h"
#include "weights_io.h"

namespace agv {

struct SpeakerEmbedding {
  Tensor vector;  // [d_model]
  AggregationMode mode = AggregationMode::kSe;
  uint64_t config_hash = 0;
};

// Everything the attention stages consume, all T-aligned.
struct AggregationFeatures {
  BackboneOutput backbone;
  Tensor f0_states;   // H_F0, empty when the mode does not use F0
  Tensor mel_states;  // H_ME, empty when the mode does not use the mel encoder
};

struct CrossAttentionParams {
  AffineView q;
  AffineView k;
  AffineView v;

  static CrossAttentionParams FromStore(const ParamStore& store, const std::string& prefix);
};

struct CrossAttentionResult {
  Tensor output;
  AttentionTrace trace;
  Tensor q, k, v;  // projected inputs
};

// Per-stage intermediates, for inspection and invariant checks.
struct AggregationTrace {
  std::optional<CrossAttentionResult> level1;
  std::optional<CrossAttentionResult> level2;
  Tensor aggregated;  // H fed to the fusion tail
  std::optional<MultiHeadResult> fusion;
};

// Per-frame (ln(f0 / 100), 1) for voiced frames, (0, 0) for unvoiced.
Tensor F0Features(const F0Contour& contour);

// Two affine layers (ReLU between) over the F0 features.
Tensor EncodeF0(const F0Contour& contour, const ParamStore& params);

// Two affine+ReLU blocks followed by a k=3 gated convolution.
Tensor EncodeMel(const MelSpectrogram& mel, const ParamStore& params);

// softmax(q(query) k(kv)^T / s) v(kv); no residual path.
CrossAttentionResult CrossAttention(const Tensor& query_states, const Tensor& kv_states,
                                    const CrossAttentionParams& params, ScaleMode mode);

// Prompting the backbone frame states with a cue (agg.level1.*).
Tensor Level1Attention(const Tensor& backbone_states, const Tensor& prompt_states,
                       const ParamStore& params, ScaleMode mode);
// Second cue queries the level-1 result (agg.level2.*).
Tensor Level2Attention(const Tensor& query_states, const Tensor& level1_states,
                       const ParamStore& params, ScaleMode mode);

// The temporal mean of `states` queries the token bank through multi-head
// attention; returns the fused [d_model] vector.
Tensor SplitAndFuse(const Tensor& states, const Tensor& tokens, size_t heads,
                    const MultiHeadParams& params, MultiHeadResult* trace = nullptr);
MultiHeadParams FusionParams(const ParamStore& store);

AggregationFeatures ComputeFeatures(const AudioBuffer& buf, const ParamStore& params,
                                    const ModelConfig& config);

SpeakerEmbedding Aggregate(const AggregationFeatures& features, const ParamStore& params,
                           const ModelConfig& config, AggregationTrace* trace = nullptr);

// Full pipeline on canonical (22050 Hz) audio of at least one window.
SpeakerEmbedding ExtractEmbedding(const AudioBuffer& buf, const ParamStore& params,
                                  const ModelConfig& config);

// Names of the attention and fusion parameters for the config.
std::vector<std::string> AttentionParamNames(const ModelConfig& config);

// Analytic gradient of sum(embedding) with respect to every tensor named by
// AttentionParamNames, holding the features fixed.
std::map<std::string, Tensor> AttentionGradients(const AggregationFeatures& features,
                                                 const ParamStore& params,
                                                 const ModelConfig& config);

}  // namespace agv

#endif  // AGV_AGGREGATION_H_
