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

#include "model_config.h"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "error.h"

namespace agv {

int BackboneConfig::bottleneck() const { return std::max(channels / 8, 4); }

bool ModelConfig::uses_f0() const {
  auto m = aggregation.mode;
  return m == AggregationMode::kSeF0 || m == AggregationMode::kSeF0ThenMe ||
         m == AggregationMode::kSeMeThenF0;
}

bool ModelConfig::uses_mel_encoder() const {
  auto m = aggregation.mode;
  return m == AggregationMode::kSeMe || m == AggregationMode::kSeF0ThenMe ||
         m == AggregationMode::kSeMeThenF0;
}

bool ModelConfig::uses_level2() const {
  auto m = aggregation.mode;
  return m == AggregationMode::kSeF0ThenMe || m == AggregationMode::kSeMeThenF0;
}

bool ModelConfig::uses_fusion() const {
  return aggregation.mode != AggregationMode::kSe && aggregation.splitting;
}

void ModelConfig::Validate() const {
  const BackboneConfig& b = backbone;
  if (b.in_dim <= 0 || b.channels <= 0 || b.scale <= 1 || b.d_model <= 0 ||
      b.dilations.empty())
    throw Error(ErrorCode::kInvalidConfig, "backbone dimensions must be positive");
  for (int d : b.dilations)
    if (d < 1) throw Error(ErrorCode::kInvalidConfig, "dilations must be positive");
  if (b.channels % b.scale != 0)
    throw Error(ErrorCode::kIndivisibleScale, std::to_string(b.channels) +
                                                  " channels into " +
                                                  std::to_string(b.scale) + " groups");
  const AggregationConfig& a = aggregation;
  if (a.n_tokens <= 0 || a.heads <= 0)
    throw Error(ErrorCode::kInvalidConfig, "tokens and heads must be positive");
  if (uses_fusion() && b.d_model % a.heads != 0)
    throw Error(ErrorCode::kIndivisibleHeads, std::to_string(b.d_model) + " dims across " +
                                                  std::to_string(a.heads) + " heads");
}

std::string ModelConfig::Canonical() const {
  std::ostringstream os;
  os << "mode=" << ModeName(aggregation.mode) << ";split=" << aggregation.splitting
     << ";tokens=" << aggregation.n_tokens << ";heads=" << aggregation.heads
     << ";scale_mode=" << ScaleModeName(aggregation.scale_mode)
     << ";in=" << backbone.in_dim << ";channels=" << backbone.channels
     << ";res2_scale=" << backbone.scale << ";dilations=";
  for (size_t i = 0; i < backbone.dilations.size(); ++i)
    os << (i ? "," : "") << backbone.dilations[i];
  os << ";d_model=" << backbone.d_model;
  return os.str();
}

uint64_t ModelConfig::Hash() const { return Fnv1a64(Canonical()); }

std::string_view ModeName(AggregationMode mode) {
  switch (mode) {
    case AggregationMode::kSe: return "se";
    case AggregationMode::kSeF0: return "se+f0";
    case AggregationMode::kSeMe: return "se+me";
    case AggregationMode::kSeF0ThenMe: return "se+f0+me";
    case AggregationMode::kSeMeThenF0: return "se+me+f0";
  }
  return "?";
}

AggregationMode ParseMode(std::string_view name) {
  for (auto m : {AggregationMode::kSe, AggregationMode::kSeF0, AggregationMode::kSeMe,
                 AggregationMode::kSeF0ThenMe, AggregationMode::kSeMeThenF0}) {
    if (ModeName(m) == name) return m;
  }
  throw Error(ErrorCode::kInvalidConfig, "unknown mode '" + std::string(name) + "'");
}

std::string_view ScaleModeName(ScaleMode mode) {
  return mode == ScaleMode::kSqrt ? "sqrt" : "linear";
}

ScaleMode ParseScaleMode(std::string_view name) {
  if (name == "sqrt") return ScaleMode::kSqrt;
  if (name == "linear") return ScaleMode::kLinear;
  throw Error(ErrorCode::kInvalidConfig, "unknown scale mode '" + std::string(name) + "'");
}

uint64_t Fnv1a64(std::string_view bytes) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string HashToHex(uint64_t hash) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace agv
