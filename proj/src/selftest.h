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

#ifndef AGV_SELFTEST_H_
#define AGV_SELFTEST_H_

#include <string>
#include <vector>

namespace agv {

struct SelfTestOptions {
  // Weight file to check; empty uses a freshly seeded desk-scale model.
  std::string weights_path;
  // Audio files run through the front-end checks.
  std::vector<std::string> audio_paths;
};

struct SelfTestReport {
  bool passed = true;
  std::string text;  // one line per check
};

// Front-end tone suite, attention gradient checks (with a seeded sign-flip
// negative control), model gradient check and weight round trip. Errors
// loading the weight file propagate as agv::Error.
SelfTestReport RunSelfTest(const SelfTestOptions& options);

}  // namespace agv

#endif  // AGV_SELFTEST_H_
