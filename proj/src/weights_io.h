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

#ifndef AGV_WEIGHTS_IO_H_
#define AGV_WEIGHTS_IO_H_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "model_config.h"
#include "nn_core.h"
#include "tensor.h"

namespace agv {

inline constexpr char kWeightsMagic[8] = {'A', 'G', 'V', 'W', '0', '0', '0', '1'};
inline constexpr int kWeightsFormatVersion = 1;

struct ParamMeta {
  uint64_t seed = 0;
  int format_version = kWeightsFormatVersion;
  ModelConfig config;
};

// Named parameter tensors. Iteration order is lexicographic by name, which
// is also the on-disk order.
class ParamStore {
 public:
  const Tensor& Get(const std::string& name) const;
  bool Contains(const std::string& name) const { return entries_.count(name) != 0; }
  // Throws HeaderMismatch for non-finite values.
  void Set(const std::string& name, Tensor value);
  AffineView Affine(const std::string& prefix) const {
    return {Get(prefix + ".weight"), Get(prefix + ".bias")};
  }

  const std::map<std::string, Tensor>& entries() const { return entries_; }
  const ParamMeta& meta() const { return meta_; }
  ParamMeta& mutable_meta() { return meta_; }

  bool operator==(const ParamStore& other) const { return entries_ == other.entries_; }

 private:
  std::map<std::string, Tensor> entries_;
  ParamMeta meta_;
};

enum class ParamKind { kAffineWeight, kConvWeight, kBias, kTokens };

struct ParamSpec {
  std::string name;
  std::vector<size_t> shape;
  ParamKind kind;
};

// Every tensor the config needs, in name order.
std::vector<ParamSpec> RequiredParams(const ModelConfig& config);

// Glorot-uniform weights (fan over taps for convolutions), zero biases,
// N(0, 1/sqrt(d)) token rows. Each tensor draws from its own mt19937_64
// stream seeded by SplitMix64(seed ^ FNV-1a(name)).
ParamStore InitParams(const ModelConfig& config, uint64_t seed);

// Strict match: MissingParameter / UnexpectedParameter (listing every
// offending name) or ShapeMismatch.
void ValidateParams(const ParamStore& store, const ModelConfig& config);

// "AGVW0001", u32 header length, JSON header, then little-endian f32
// payloads in header order.
std::vector<uint8_t> SerializeParams(const ParamStore& store);
// Validates magic, header consistency and payload size, then the tensor set
// against the config recorded in the header.
ParamStore DeserializeParams(std::span<const uint8_t> bytes);

void SaveParams(const ParamStore& store, const std::string& path);
ParamStore LoadParams(const std::string& path);

// Concatenated values of the named tensors, and its inverse.
std::vector<double> FlattenParams(const ParamStore& store,
                                  const std::vector<std::string>& names);
void AssignFlat(ParamStore* store, const std::vector<std::string>& names,
                std::span<const double> flat);

uint64_t SplitMix64(uint64_t x);

}  // namespace agv

#endif  // AGV_WEIGHTS_IO_H_
