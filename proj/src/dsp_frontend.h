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

#ifndef AGV_DSP_FRONTEND_H_
#define AGV_DSP_FRONTEND_H_

#include <cstddef>
#include <vector>

#include "audio_io.h"
#include "tensor.h"

namespace agv {

struct MelParams {
  int n_fft = 1024;
  int win_length = 1024;
  int hop_length = 256;
  int n_mels = 80;
  int sample_rate = kCanonicalSampleRate;
  double fmin_hz = 0.0;
  double fmax_hz = 8000.0;
};

inline constexpr double kMelFloor = 1e-5;

// [T x n_mels] natural-log mel magnitudes, floor-clamped at ln(1e-5).
struct MelSpectrogram {
  Tensor frames;
  MelParams params;

  size_t num_frames() const { return frames.empty() ? 0 : frames.rows(); }
};

struct YinParams {
  int win_length = 1024;
  int hop_length = 256;
  double threshold = 0.15;
  double fmin_hz = 60.0;
  double fmax_hz = 500.0;
  // Frames whose best normalized difference exceeds this are unvoiced.
  double unvoiced_cmnd = 0.5;
  double rms_floor = 1e-4;
};

struct F0Frame {
  double f0_hz = 0.0;
  bool voiced = false;
  double cmnd_min = 0.0;
};

struct F0Contour {
  std::vector<F0Frame> frames;
  int hop_length = 256;
  int win_length = 1024;
};

// floor((n - win) / hop) + 1, or 0 when n < win. No centre padding.
size_t FrameCount(size_t n_samples, int win_length, int hop_length);

// Slaney-style mel scale: linear below 1 kHz, logarithmic above.
double HzToMel(double hz);
double MelToHz(double mel);

// Centre frequency in Hz of each triangular filter.
std::vector<double> MelCenterFrequencies(const MelParams& params);

// [T x (n_fft/2 + 1)] magnitudes of periodic-Hann windowed frames.
// Throws TooShort when fewer samples than one window.
Tensor StftMagnitude(const AudioBuffer& buf, const MelParams& params = {});

// [n_mels x (n_fft/2 + 1)] area-normalized triangular filters.
Tensor MelFilterbank(const MelParams& params = {});

MelSpectrogram ComputeMelSpectrogram(const AudioBuffer& buf,
                                     const MelParams& params = {});

F0Contour YinF0(const AudioBuffer& buf, const YinParams& params = {});

}  // namespace agv

#endif  // AGV_DSP_FRONTEND_H_
