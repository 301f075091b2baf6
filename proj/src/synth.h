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

#ifndef AGV_SYNTH_H_
#define AGV_SYNTH_H_

#include <cstdint>

#include "audio_io.h"

namespace agv {

// Deterministic test signals.

AudioBuffer Sine(double freq_hz, double seconds, int sample_rate = kCanonicalSampleRate,
                 double amplitude = 0.5, double phase = 0.0);

// Additive sawtooth with every harmonic below Nyquist (no aliasing).
AudioBuffer BandLimitedSawtooth(double freq_hz, double seconds,
                                int sample_rate = kCanonicalSampleRate,
                                double amplitude = 0.5);

// Harmonic voice-like tone: harmonics of f0 up to 8 kHz whose level falls by
// `tilt_db_per_octave`, with slow vibrato and a little seeded noise.
struct VoiceSpec {
  double f0_hz = 150.0;
  double tilt_db_per_octave = -6.0;
  double vibrato_depth = 0.01;  // fraction of f0
  double vibrato_hz = 5.0;
  double noise_level = 0.002;
  double amplitude = 0.5;
};
AudioBuffer SynthVoice(const VoiceSpec& spec, double seconds, uint64_t seed,
                       int sample_rate = kCanonicalSampleRate);

}  // namespace agv

#endif  // AGV_SYNTH_H_
