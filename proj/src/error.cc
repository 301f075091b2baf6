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

#include "error.h"

namespace agv {

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedContainer: return "MalformedContainer";
    case ErrorCode::kUnsupportedEncoding: return "UnsupportedEncoding";
    case ErrorCode::kEmptyAudio: return "EmptyAudio";
    case ErrorCode::kRateOutOfRange: return "RateOutOfRange";
    case ErrorCode::kTooShort: return "TooShort";
    case ErrorCode::kDegenerateBand: return "DegenerateBand";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kEvenKernel: return "EvenKernel";
    case ErrorCode::kIndivisibleHeads: return "IndivisibleHeads";
    case ErrorCode::kIndivisibleScale: return "IndivisibleScale";
    case ErrorCode::kNonFiniteEvaluation: return "NonFiniteEvaluation";
    case ErrorCode::kEmptyContour: return "EmptyContour";
    case ErrorCode::kMissingParameter: return "MissingParameter";
    case ErrorCode::kUnexpectedParameter: return "UnexpectedParameter";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kHeaderMismatch: return "HeaderMismatch";
    case ErrorCode::kTruncatedPayload: return "TruncatedPayload";
    case ErrorCode::kZeroNorm: return "ZeroNorm";
    case ErrorCode::kDimMismatch: return "DimMismatch";
    case ErrorCode::kLabelMismatch: return "LabelMismatch";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kInternal: return "Internal";
  }
  return "Unknown";
}

}  // namespace agv
