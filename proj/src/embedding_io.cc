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

#include "embedding_io.h"

#include <cstring>

#include "error.h"
#include "file_util.h"
#include "json.hpp"

namespace agv {

using nlohmann::json;

std::string EmbeddingToJson(const SpeakerEmbedding& e) {
  json j = {{"mode", std::string(ModeName(e.mode))},
            {"d", e.vector.size()},
            {"config_hash", HashToHex(e.config_hash)},
            {"values", e.vector.values()}};
  return j.dump() + "\n";
}

SpeakerEmbedding EmbeddingFromJson(const std::string& text) {
  try {
    const json j = json::parse(text);
    SpeakerEmbedding e;
    e.mode = ParseMode(j.at("mode").get<std::string>());
    e.config_hash = std::stoull(j.at("config_hash").get<std::string>(), nullptr, 16);
    e.vector = Tensor::Vector(j.at("values").get<std::vector<double>>());
    if (j.at("d").get<size_t>() != e.vector.size())
      throw Error(ErrorCode::kDimMismatch, "declared d disagrees with value count");
    if (!e.vector.AllFinite()) throw Error(ErrorCode::kInvalidArgument, "non-finite embedding");
    return e;
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::kInvalidArgument, std::string("bad embedding JSON: ") + ex.what());
  } catch (const std::invalid_argument&) {
    throw Error(ErrorCode::kInvalidArgument, "bad config_hash in embedding JSON");
  }
}

std::vector<uint8_t> EmbeddingToBinary(const SpeakerEmbedding& e) {
  std::vector<uint8_t> out(std::begin(kEmbeddingMagic), std::end(kEmbeddingMagic));
  auto put = [&out](uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
  };
  put(static_cast<uint32_t>(e.vector.size()));
  for (double v : e.vector.data()) {
    const float f = static_cast<float>(v);
    uint32_t bits;
    std::memcpy(&bits, &f, sizeof bits);
    put(bits);
  }
  return out;
}

SpeakerEmbedding EmbeddingFromBinary(std::span<const uint8_t> bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kEmbeddingMagic, 8) != 0)
    throw Error(ErrorCode::kBadMagic, "not an AGVE0001 embedding");
  auto get = [&bytes](size_t at) {
    return static_cast<uint32_t>(bytes[at]) | (static_cast<uint32_t>(bytes[at + 1]) << 8) |
           (static_cast<uint32_t>(bytes[at + 2]) << 16) |
           (static_cast<uint32_t>(bytes[at + 3]) << 24);
  };
  const size_t d = get(8);
  if (bytes.size() != 12 + 4 * d)
    throw Error(ErrorCode::kTruncatedPayload, "embedding payload length disagrees with header");
  std::vector<double> values(d);
  for (size_t i = 0; i < d; ++i) {
    const uint32_t bits = get(12 + 4 * i);
    float f;
    std::memcpy(&f, &bits, sizeof f);
    values[i] = f;
  }
  SpeakerEmbedding e;
  e.vector = Tensor::Vector(std::move(values));
  return e;
}

void SaveEmbedding(const SpeakerEmbedding& e, const std::string& path, bool binary) {
  if (binary) {
    WriteFileAtomic(path, EmbeddingToBinary(e));
  } else {
    WriteFileAtomic(path, EmbeddingToJson(e));
  }
}

SpeakerEmbedding LoadEmbedding(const std::string& path) {
  const std::vector<uint8_t> bytes = ReadFileBytes(path);
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), kEmbeddingMagic, 8) == 0)
    return EmbeddingFromBinary(bytes);
  return EmbeddingFromJson(std::string(bytes.begin(), bytes.end()));
}

}  // namespace agv
