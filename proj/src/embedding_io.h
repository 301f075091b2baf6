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

#ifndef AGV_EMBEDDING_IO_H_
#define AGV_EMBEDDING_IO_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "aggregation.h"

namespace agv {

inline constexpr char kEmbeddingMagic[8] = {'A', 'G', 'V', 'E', '0', '0', '0', '1'};

// {"config_hash": "<16 hex>", "d": n, "mode": "...", "values": [...]}
std::string EmbeddingToJson(const SpeakerEmbedding& e);
SpeakerEmbedding EmbeddingFromJson(const std::string& text);

// "AGVE0001", u32 dimension, little-endian f32 values. Mode and hash are not
// stored; decoding yields mode kSe and hash 0.
std::vector<uint8_t> EmbeddingToBinary(const SpeakerEmbedding& e);
SpeakerEmbedding EmbeddingFromBinary(std::span<const uint8_t> bytes);

// Writes through a temporary file and a rename. Format picked by the
// `binary` flag; loading sniffs the magic.
void SaveEmbedding(const SpeakerEmbedding& e, const std::string& path, bool binary);
SpeakerEmbedding LoadEmbedding(const std::string& path);

}  // namespace agv

#endif  // AGV_EMBEDDING_IO_H_
