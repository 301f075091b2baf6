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

#ifndef AGV_MODEL_CONFIG_H_
#define AGV_MODEL_CONFIG_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "nn_core.h"

namespace agv {

struct BackboneConfig {
  int in_dim = 80;
  int channels = 64;  // 512 at full scale
  int scale = 8;
  std::vector<int> dilations{2, 3, 4};
  int d_model = 192;

  int n_blocks() const { return static_cast<int>(dilations.size()); }
  int group_width() const { return channels / scale; }
  int bottleneck() const;  // max(C / 8, 4)
};

// Which speaker cues are aggregated and in what order.
enum class AggregationMode {
  kSe,          // backbone vector only
  kSeF0,        // F0 prompts the backbone states
  kSeMe,        // mel states prompt the backbone states
  kSeF0ThenMe,  // F0 prompting, then mel states query the result
  kSeMeThenF0,  // mel prompting, then F0 states query the result
};

struct AggregationConfig {
  AggregationMode mode = AggregationMode::kSeF0ThenMe;
  bool splitting = true;
  int n_tokens = 8;
  int heads = 4;
  ScaleMode scale_mode = ScaleMode::kSqrt;
};

struct ModelConfig {
  BackboneConfig backbone;
  AggregationConfig aggregation;

  int d_model() const { return backbone.d_model; }
  bool uses_f0() const;
  bool uses_mel_encoder() const;
  bool uses_level2() const;
  bool uses_fusion() const;

  // Throws InvalidConfig / IndivisibleScale / IndivisibleHeads.
  void Validate() const;
  // 64-bit FNV-1a digest of the canonical description below.
  uint64_t Hash() const;
  std::string Canonical() const;
};

// "se", "se+f0", "se+me", "se+f0+me", "se+me+f0".
std::string_view ModeName(AggregationMode mode);
AggregationMode ParseMode(std::string_view name);
std::string_view ScaleModeName(ScaleMode mode);
ScaleMode ParseScaleMode(std::string_view name);

uint64_t Fnv1a64(std::string_view bytes);
std::string HashToHex(uint64_t hash);

}  // namespace agv

#endif  // AGV_MODEL_CONFIG_H_
