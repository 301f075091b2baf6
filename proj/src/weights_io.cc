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

#include "weights_io.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>
#include <random>
#include <set>

#include "error.h"
#include "file_util.h"
#include "json.hpp"

namespace agv {
namespace {

using nlohmann::json;

json ConfigToJson(const ModelConfig& c) {
  return json{
      {"mode", std::string(ModeName(c.aggregation.mode))},
      {"splitting", c.aggregation.splitting},
      {"n_tokens", c.aggregation.n_tokens},
      {"heads", c.aggregation.heads},
      {"scale_mode", std::string(ScaleModeName(c.aggregation.scale_mode))},
      {"in_dim", c.backbone.in_dim},
      {"channels", c.backbone.channels},
      {"res2_scale", c.backbone.scale},
      {"dilations", c.backbone.dilations},
      {"d_model", c.backbone.d_model},
  };
}

ModelConfig ConfigFromJson(const json& j) {
  ModelConfig c;
  c.aggregation.mode = ParseMode(j.at("mode").get<std::string>());
  c.aggregation.splitting = j.at("splitting").get<bool>();
  c.aggregation.n_tokens = j.at("n_tokens").get<int>();
  c.aggregation.heads = j.at("heads").get<int>();
  c.aggregation.scale_mode = ParseScaleMode(j.at("scale_mode").get<std::string>());
  c.backbone.in_dim = j.at("in_dim").get<int>();
  c.backbone.channels = j.at("channels").get<int>();
  c.backbone.scale = j.at("res2_scale").get<int>();
  c.backbone.dilations = j.at("dilations").get<std::vector<int>>();
  c.backbone.d_model = j.at("d_model").get<int>();
  return c;
}

void AddAffine(std::vector<ParamSpec>* specs, const std::string& prefix, size_t in,
               size_t out) {
  specs->push_back({prefix + ".weight", {in, out}, ParamKind::kAffineWeight});
  specs->push_back({prefix + ".bias", {out}, ParamKind::kBias});
}

void AddConv(std::vector<ParamSpec>* specs, const std::string& prefix, size_t out,
             size_t in, size_t k) {
  specs->push_back({prefix + ".weight", {out, in, k}, ParamKind::kConvWeight});
  specs->push_back({prefix + ".bias", {out}, ParamKind::kBias});
}

// Uniform on [0, 1) with 53 random bits.
double UnitUniform(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

// Box-Muller; the first uniform is shifted into (0, 1] to keep log finite.
double StandardNormal(std::mt19937_64& gen) {
  const double u1 = 1.0 - UnitUniform(gen);
  const double u2 = UnitUniform(gen);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void PutU32(std::vector<uint8_t>* out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out->push_back(static_cast<uint8_t>(v >> (8 * i)));
}

uint32_t GetU32(std::span<const uint8_t> b, size_t at) {
  return static_cast<uint32_t>(b[at]) | (static_cast<uint32_t>(b[at + 1]) << 8) |
         (static_cast<uint32_t>(b[at + 2]) << 16) |
         (static_cast<uint32_t>(b[at + 3]) << 24);
}

std::string JoinNames(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& n : names) out += (out.empty() ? "" : ", ") + n;
  return out;
}

}  // namespace

const Tensor& ParamStore::Get(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw Error(ErrorCode::kMissingParameter, name);
  return it->second;
}

void ParamStore::Set(const std::string& name, Tensor value) {
  if (!value.AllFinite())
    throw Error(ErrorCode::kHeaderMismatch, "non-finite values in " + name);
  entries_[name] = std::move(value);
}

uint64_t SplitMix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::vector<ParamSpec> RequiredParams(const ModelConfig& config) {
  config.Validate();
  const BackboneConfig& b = config.backbone;
  const size_t c = static_cast<size_t>(b.channels);
  const size_t w = static_cast<size_t>(b.group_width());
  const size_t bn = static_cast<size_t>(b.bottleneck());
  const size_t d = static_cast<size_t>(b.d_model);
  const size_t in = static_cast<size_t>(b.in_dim);

  std::vector<ParamSpec> specs;
  AddConv(&specs, "backbone.input", c, in, 1);
  for (int i = 1; i <= b.n_blocks(); ++i) {
    const std::string block = "backbone.block" + std::to_string(i);
    AddConv(&specs, block + ".conv_in", c, c, 1);
    for (int g = 2; g <= b.scale; ++g)
      AddConv(&specs, block + ".res2.conv" + std::to_string(g), w, w, 3);
    AddConv(&specs, block + ".conv_out", c, c, 1);
    AddAffine(&specs, block + ".se.fc1", c, bn);
    AddAffine(&specs, block + ".se.fc2", bn, c);
  }
  AddConv(&specs, "backbone.mfa", c, c * static_cast<size_t>(b.n_blocks()), 1);
  AddAffine(&specs, "backbone.frame_proj", c, d);
  AddAffine(&specs, "backbone.pool.fc1", c, bn);
  AddAffine(&specs, "backbone.pool.fc2", bn, c);
  AddAffine(&specs, "backbone.pool_proj", 2 * c, d);

  if (config.uses_f0()) {
    AddAffine(&specs, "agg.f0_enc.fc1", 2, d);
    AddAffine(&specs, "agg.f0_enc.fc2", d, d);
  }
  if (config.uses_mel_encoder()) {
    AddAffine(&specs, "agg.mel_enc.fc1", in, d);
    AddAffine(&specs, "agg.mel_enc.fc2", d, d);
    AddConv(&specs, "agg.mel_enc.glu", 2 * d, d, 3);
  }
  if (config.aggregation.mode != AggregationMode::kSe) {
    for (const char* p : {"q", "k", "v"}) AddAffine(&specs, std::string("agg.level1.") + p, d, d);
  }
  if (config.uses_level2()) {
    for (const char* p : {"q", "k", "v"}) AddAffine(&specs, std::string("agg.level2.") + p, d, d);
  }
  if (config.uses_fusion()) {
    for (const char* p : {"q", "k", "v", "o"}) AddAffine(&specs, std::string("agg.fuse.") + p, d, d);
    specs.push_back({"agg.tokens", {static_cast<size_t>(config.aggregation.n_tokens), d},
                     ParamKind::kTokens});
  }
  std::sort(specs.begin(), specs.end(),
            [](const ParamSpec& x, const ParamSpec& y) { return x.name < y.name; });
  return specs;
}

ParamStore InitParams(const ModelConfig& config, uint64_t seed) {
  ParamStore store;
  store.mutable_meta().seed = seed;
  store.mutable_meta().config = config;
  for (const ParamSpec& spec : RequiredParams(config)) {
    std::mt19937_64 gen(SplitMix64(seed ^ Fnv1a64(spec.name)));
    Tensor t(spec.shape);
    switch (spec.kind) {
      case ParamKind::kBias:
        break;
      case ParamKind::kAffineWeight:
      case ParamKind::kConvWeight: {
        double fan_in, fan_out;
        if (spec.kind == ParamKind::kAffineWeight) {
          fan_in = static_cast<double>(spec.shape[0]);
          fan_out = static_cast<double>(spec.shape[1]);
        } else {
          fan_in = static_cast<double>(spec.shape[1] * spec.shape[2]);
          fan_out = static_cast<double>(spec.shape[0] * spec.shape[2]);
        }
        const double a = std::sqrt(6.0 / (fan_in + fan_out));
        for (double& v : t.data()) v = a * (2.0 * UnitUniform(gen) - 1.0);
        break;
      }
      case ParamKind::kTokens: {
        const double sd = 1.0 / std::sqrt(static_cast<double>(spec.shape[1]));
        for (double& v : t.data()) v = sd * StandardNormal(gen);
        break;
      }
    }
    store.Set(spec.name, std::move(t));
  }
  return store;
}

void ValidateParams(const ParamStore& store, const ModelConfig& config) {
  const std::vector<ParamSpec> specs = RequiredParams(config);
  std::set<std::string> expected;
  std::vector<std::string> missing, bad_shape;
  for (const ParamSpec& spec : specs) {
    expected.insert(spec.name);
    if (!store.Contains(spec.name)) {
      missing.push_back(spec.name);
    } else if (store.Get(spec.name).shape() != spec.shape) {
      bad_shape.push_back(spec.name + " " + store.Get(spec.name).ShapeString());
    }
  }
  std::vector<std::string> extra;
  for (const auto& [name, _] : store.entries())
    if (!expected.count(name)) extra.push_back(name);
  if (!missing.empty())
    throw Error(ErrorCode::kMissingParameter, "missing: " + JoinNames(missing));
  if (!extra.empty())
    throw Error(ErrorCode::kUnexpectedParameter, "unexpected: " + JoinNames(extra));
  if (!bad_shape.empty())
    throw Error(ErrorCode::kShapeMismatch, "wrong shape: " + JoinNames(bad_shape));
}

std::vector<uint8_t> SerializeParams(const ParamStore& store) {
  const ParamMeta& meta = store.meta();
  json tensors = json::array();
  for (const auto& [name, t] : store.entries()) {
    tensors.push_back({{"name", name},
                       {"shape", t.shape()},
                       {"dtype", "f32"},
                       {"nbytes", t.size() * 4}});
  }
  json header = {
      {"format_version", meta.format_version},
      {"meta",
       {{"seed", meta.seed},
        {"config_digest", HashToHex(meta.config.Hash())},
        {"config", ConfigToJson(meta.config)}}},
      {"tensors", tensors},
  };
  const std::string text = header.dump();

  std::vector<uint8_t> out(std::begin(kWeightsMagic), std::end(kWeightsMagic));
  PutU32(&out, static_cast<uint32_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  for (const auto& [name, t] : store.entries()) {
    for (double v : t.data()) {
      const float f = static_cast<float>(v);
      uint32_t bits;
      std::memcpy(&bits, &f, sizeof bits);
      PutU32(&out, bits);
    }
  }
  return out;
}

ParamStore DeserializeParams(std::span<const uint8_t> bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kWeightsMagic, 8) != 0)
    throw Error(ErrorCode::kBadMagic, "not an AGVW0001 weight file");
  if (bytes.size() < 12) throw Error(ErrorCode::kTruncatedPayload, "missing header length");
  const size_t header_len = GetU32(bytes, 8);
  if (bytes.size() - 12 < header_len)
    throw Error(ErrorCode::kTruncatedPayload, "header extends past end of file");

  json header;
  try {
    header = json::parse(bytes.begin() + 12, bytes.begin() + 12 + static_cast<long>(header_len));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kHeaderMismatch, std::string("unreadable header: ") + e.what());
  }

  ParamStore store;
  struct Entry {
    std::string name;
    std::vector<size_t> shape;
  };
  std::vector<Entry> layout;
  size_t payload_bytes = 0;
  try {
    ParamMeta& meta = store.mutable_meta();
    meta.format_version = header.at("format_version").get<int>();
    if (meta.format_version != kWeightsFormatVersion)
      throw Error(ErrorCode::kHeaderMismatch,
                  "format version " + std::to_string(meta.format_version));
    meta.seed = header.at("meta").at("seed").get<uint64_t>();
    meta.config = ConfigFromJson(header.at("meta").at("config"));
    const std::string digest = header.at("meta").at("config_digest").get<std::string>();
    if (digest != HashToHex(meta.config.Hash()))
      throw Error(ErrorCode::kHeaderMismatch, "config digest does not match config");
    std::string previous;
    for (const json& t : header.at("tensors")) {
      Entry e{t.at("name").get<std::string>(), t.at("shape").get<std::vector<size_t>>()};
      if (t.at("dtype").get<std::string>() != "f32")
        throw Error(ErrorCode::kHeaderMismatch, e.name + ": dtype must be f32");
      const size_t nbytes = t.at("nbytes").get<size_t>();
      if (ShapeProduct(e.shape) * 4 != nbytes)
        throw Error(ErrorCode::kHeaderMismatch,
                    e.name + ": shape disagrees with payload length " + std::to_string(nbytes));
      if (!previous.empty() && e.name <= previous)
        throw Error(ErrorCode::kHeaderMismatch, "tensor names not unique and sorted at " + e.name);
      previous = e.name;
      payload_bytes += nbytes;
      layout.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kHeaderMismatch, std::string("malformed header: ") + e.what());
  }

  const size_t available = bytes.size() - 12 - header_len;
  if (available < payload_bytes)
    throw Error(ErrorCode::kTruncatedPayload, std::to_string(available) + " payload bytes, header declares " +
                                                  std::to_string(payload_bytes));
  if (available > payload_bytes)
    throw Error(ErrorCode::kHeaderMismatch, std::to_string(available - payload_bytes) +
                                                " trailing bytes after payload");

  size_t at = 12 + header_len;
  for (Entry& e : layout) {
    Tensor t(e.shape);
    for (double& v : t.data()) {
      const uint32_t bits = GetU32(bytes, at);
      at += 4;
      float f;
      std::memcpy(&f, &bits, sizeof f);
      v = f;
    }
    store.Set(e.name, std::move(t));
  }
  ValidateParams(store, store.meta().config);
  return store;
}

void SaveParams(const ParamStore& store, const std::string& path) {
  WriteFileAtomic(path, SerializeParams(store));
}

ParamStore LoadParams(const std::string& path) { return DeserializeParams(ReadFileBytes(path)); }

std::vector<double> FlattenParams(const ParamStore& store,
                                  const std::vector<std::string>& names) {
  std::vector<double> flat;
  for (const std::string& n : names) {
    const Tensor& t = store.Get(n);
    flat.insert(flat.end(), t.data().begin(), t.data().end());
  }
  return flat;
}

void AssignFlat(ParamStore* store, const std::vector<std::string>& names,
                std::span<const double> flat) {
  size_t at = 0;
  for (const std::string& n : names) {
    Tensor t = store->Get(n);
    if (at + t.size() > flat.size())
      throw Error(ErrorCode::kShapeMismatch, "flat parameter vector too short");
    std::copy(flat.begin() + static_cast<long>(at),
              flat.begin() + static_cast<long>(at + t.size()), t.data().begin());
    at += t.size();
    store->Set(n, std::move(t));
  }
  if (at != flat.size())
    throw Error(ErrorCode::kShapeMismatch, "flat parameter vector too long");
}

}  // namespace agv
