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

#ifndef AGV_AUDIO_IO_H_
#define AGV_AUDIO_IO_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace agv {

inline constexpr int kCanonicalSampleRate = 22050;

// Mono samples in [-1, 1] plus their rate.
struct AudioBuffer {
  std::vector<double> samples;
  int sample_rate_hz = kCanonicalSampleRate;
};

// Accepts RIFF/WAVE with PCM16 or IEEE float32 payloads, 1 or 2 channels.
// Stereo is folded down by averaging. Float samples are clamped to [-1, 1].
AudioBuffer DecodeWav(std::span<const uint8_t> bytes);
AudioBuffer ReadWavFile(const std::string& path);

// PCM16 mono RIFF/WAVE; samples are rounded to the nearest code and clipped.
std::vector<uint8_t> EncodeWavPcm16(const AudioBuffer& buf);
void WriteWavFile(const std::string& path, const AudioBuffer& buf);

// Windowed-sinc resampler: 64 zero-crossings per side, Kaiser beta 8,
// cutoff at 0.95 of the lower Nyquist. Output length is
// round(len * target / source). Equal rates return the input unchanged.
AudioBuffer Resample(const AudioBuffer& buf, int target_hz);

// Scales so that max |s| == 0.95. Silent buffers are returned unchanged.
AudioBuffer PeakNormalize(const AudioBuffer& buf);

// Resamples to 22050 Hz and optionally peak-normalizes. Throws EmptyAudio
// on an empty buffer.
AudioBuffer Canonicalize(const AudioBuffer& buf, bool peak_normalize = false);

}  // namespace agv

#endif  // AGV_AUDIO_IO_H_
