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

#ifndef AGV_ERROR_H_
#define AGV_ERROR_H_

#include <stdexcept>
#include <string>

namespace agv {

// Every failure the core can report. The C API maps these one-to-one onto
// agv_status values, so append only.
enum class ErrorCode {
  kMalformedContainer = 1,
  kUnsupportedEncoding,
  kEmptyAudio,
  kRateOutOfRange,
  kTooShort,
  kDegenerateBand,
  kShapeMismatch,
  kEvenKernel,
  kIndivisibleHeads,
  kIndivisibleScale,
  kNonFiniteEvaluation,
  kEmptyContour,
  kMissingParameter,
  kUnexpectedParameter,
  kInvalidConfig,
  kBadMagic,
  kHeaderMismatch,
  kTruncatedPayload,
  kZeroNorm,
  kDimMismatch,
  kLabelMismatch,
  kIo,
  kInvalidArgument,
  kInternal,
};

const char* ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace agv

#endif  // AGV_ERROR_H_
