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

#ifndef AGV_FILE_UTIL_H_
#define AGV_FILE_UTIL_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace agv {

std::vector<uint8_t> ReadFileBytes(const std::string& path);

// Writes to "<path>.tmp" and renames over path.
void WriteFileAtomic(const std::string& path, std::span<const uint8_t> bytes);
void WriteFileAtomic(const std::string& path, const std::string& text);

}  // namespace agv

#endif  // AGV_FILE_UTIL_H_
