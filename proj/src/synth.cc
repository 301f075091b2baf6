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

#include "synth.h"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace agv {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

size_t LengthFor(double seconds, int rate) {
  return static_cast<size_t>(std::llround(seconds * rate));
}

}  // namespace

AudioBuffer Sine(double freq_hz, double seconds, int sample_rate, double amplitude,
                 double phase) {
  AudioBuffer buf;
  buf.sample_rate_hz = sample_rate;
  buf.samples.resize(LengthFor(seconds, sample_rate));
  for (size_t n = 0; n < buf.samples.size(); ++n)
    buf.samples[n] = amplitude * std::sin(kTwoPi * freq_hz * n / sample_rate + phase);
  return buf;
}

AudioBuffer BandLimitedSawtooth(double freq_hz, double seconds, int sample_rate,
                                double amplitude) {
  AudioBuffer buf;
  buf.sample_rate_hz = sample_rate;
  buf.samples.assign(LengthFor(seconds, sample_rate), 0.0);
  const int harmonics = static_cast<int>(std::floor(0.5 * sample_rate / freq_hz - 1e-9));
  for (size_t n = 0; n < buf.samples.size(); ++n) {
    double acc = 0.0;
    for (int h = 1; h <= harmonics; ++h)
      acc += std::sin(kTwoPi * h * freq_hz * n / sample_rate) / h;
    buf.samples[n] = amplitude * (2.0 / std::numbers::pi) * acc;
  }
  return buf;
}

AudioBuffer SynthVoice(const VoiceSpec& spec, double seconds, uint64_t seed,
                       int sample_rate) {
  AudioBuffer buf;
  buf.sample_rate_hz = sample_rate;
  buf.samples.assign(LengthFor(seconds, sample_rate), 0.0);
  const int harmonics = static_cast<int>(std::floor(8000.0 / (spec.f0_hz * (1 + spec.vibrato_depth))));
  std::vector<double> gains(static_cast<size_t>(harmonics));
  double total = 0.0;
  for (int h = 1; h <= harmonics; ++h) {
    gains[static_cast<size_t>(h - 1)] =
        std::pow(10.0, spec.tilt_db_per_octave * std::log2(static_cast<double>(h)) / 20.0);
    total += gains[static_cast<size_t>(h - 1)];
  }
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> noise(0.0, spec.noise_level);
  const double phase0 = static_cast<double>(gen() % 1000) / 1000.0 * kTwoPi;
  double phase = 0.0;
  for (size_t n = 0; n < buf.samples.size(); ++n) {
    const double t = static_cast<double>(n) / sample_rate;
    const double f0 =
        spec.f0_hz * (1.0 + spec.vibrato_depth * std::sin(kTwoPi * spec.vibrato_hz * t + phase0));
    phase += kTwoPi * f0 / sample_rate;
    double acc = 0.0;
    for (int h = 1; h <= harmonics; ++h) acc += gains[static_cast<size_t>(h - 1)] * std::sin(h * phase);
    buf.samples[n] = spec.amplitude * acc / total + noise(gen);
  }
  return buf;
}

}  // namespace agv
