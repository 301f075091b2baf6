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

#include "audio_io.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numbers>
#include <numeric>

#include "error.h"

namespace agv {
namespace {

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatFloat = 3;
constexpr uint16_t kFormatExtensible = 0xFFFE;

constexpr int kZeroCrossings = 64;
constexpr double kKaiserBeta = 8.0;
constexpr double kCutoffFraction = 0.95;
constexpr int kMinRate = 4000;

uint16_t ReadU16(std::span<const uint8_t> b, size_t at) {
  return static_cast<uint16_t>(b[at] | (b[at + 1] << 8));
}

uint32_t ReadU32(std::span<const uint8_t> b, size_t at) {
  return static_cast<uint32_t>(b[at]) | (static_cast<uint32_t>(b[at + 1]) << 8) |
         (static_cast<uint32_t>(b[at + 2]) << 16) |
         (static_cast<uint32_t>(b[at + 3]) << 24);
}

void PutU16(std::vector<uint8_t>* out, uint16_t v) {
  out->push_back(v & 0xFF);
  out->push_back(v >> 8);
}

void PutU32(std::vector<uint8_t>* out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out->push_back((v >> (8 * i)) & 0xFF);
}

bool TagIs(std::span<const uint8_t> b, size_t at, const char* tag) {
  return std::memcmp(b.data() + at, tag, 4) == 0;
}

struct FormatChunk {
  uint16_t format = 0;
  uint16_t channels = 0;
  uint32_t sample_rate = 0;
  uint16_t bits = 0;
  uint16_t block_align = 0;
};

}  // namespace

AudioBuffer DecodeWav(std::span<const uint8_t> bytes) {
  if (bytes.size() < 12 || !TagIs(bytes, 0, "RIFF") || !TagIs(bytes, 8, "WAVE"))
    throw Error(ErrorCode::kMalformedContainer, "missing RIFF/WAVE magic");

  FormatChunk fmt;
  bool have_fmt = false;
  std::span<const uint8_t> data;
  bool have_data = false;

  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    uint32_t chunk_size = ReadU32(bytes, pos + 4);
    size_t body = pos + 8;
    if (chunk_size > bytes.size() - body)
      throw Error(ErrorCode::kMalformedContainer, "chunk overruns the file");
    if (TagIs(bytes, pos, "fmt ")) {
      if (chunk_size < 16) throw Error(ErrorCode::kMalformedContainer, "short fmt chunk");
      fmt.format = ReadU16(bytes, body);
      fmt.channels = ReadU16(bytes, body + 2);
      fmt.sample_rate = ReadU32(bytes, body + 4);
      fmt.block_align = ReadU16(bytes, body + 12);
      fmt.bits = ReadU16(bytes, body + 14);
      if (fmt.format == kFormatExtensible) {
        if (chunk_size < 40)
          throw Error(ErrorCode::kMalformedContainer, "short extensible fmt chunk");
        // First two bytes of the sub-format GUID carry the real format tag.
        fmt.format = ReadU16(bytes, body + 24);
      }
      have_fmt = true;
    } else if (TagIs(bytes, pos, "data")) {
      data = bytes.subspan(body, chunk_size);
      have_data = true;
    }
    pos = body + chunk_size + (chunk_size & 1);
  }
  if (!have_fmt || !have_data)
    throw Error(ErrorCode::kMalformedContainer, "missing fmt or data chunk");

  bool pcm16 = fmt.format == kFormatPcm && fmt.bits == 16;
  bool f32 = fmt.format == kFormatFloat && fmt.bits == 32;
  if (!pcm16 && !f32)
    throw Error(ErrorCode::kUnsupportedEncoding,
                "format tag " + std::to_string(fmt.format) + " with " +
                    std::to_string(fmt.bits) + " bits per sample");
  if (fmt.channels != 1 && fmt.channels != 2)
    throw Error(ErrorCode::kUnsupportedEncoding,
                std::to_string(fmt.channels) + " channels");
  if (fmt.sample_rate == 0)
    throw Error(ErrorCode::kMalformedContainer, "zero sample rate");

  size_t bytes_per_sample = fmt.bits / 8;
  size_t frame_bytes = bytes_per_sample * fmt.channels;
  if (fmt.block_align != frame_bytes)
    throw Error(ErrorCode::kMalformedContainer, "block align disagrees with format");
  size_t frames = data.size() / frame_bytes;
  if (frames == 0) throw Error(ErrorCode::kEmptyAudio, "no sample frames");

  AudioBuffer out;
  out.sample_rate_hz = static_cast<int>(fmt.sample_rate);
  out.samples.resize(frames);
  for (size_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (size_t c = 0; c < fmt.channels; ++c) {
      size_t at = i * frame_bytes + c * bytes_per_sample;
      double v;
      if (pcm16) {
        v = static_cast<int16_t>(ReadU16(data, at)) / 32768.0;
      } else {
        uint32_t bits = ReadU32(data, at);
        float f;
        std::memcpy(&f, &bits, sizeof f);
        v = std::isfinite(f) ? std::clamp(static_cast<double>(f), -1.0, 1.0) : 0.0;
      }
      acc += v;
    }
    out.samples[i] = acc / fmt.channels;
  }
  return out;
}

AudioBuffer ReadWavFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  return DecodeWav(bytes);
}

std::vector<uint8_t> EncodeWavPcm16(const AudioBuffer& buf) {
  uint32_t data_bytes = static_cast<uint32_t>(buf.samples.size() * 2);
  std::vector<uint8_t> out;
  out.reserve(44 + data_bytes);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  PutU32(&out, 36 + data_bytes);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  PutU32(&out, 16);
  PutU16(&out, kFormatPcm);
  PutU16(&out, 1);
  PutU32(&out, static_cast<uint32_t>(buf.sample_rate_hz));
  PutU32(&out, static_cast<uint32_t>(buf.sample_rate_hz) * 2);
  PutU16(&out, 2);
  PutU16(&out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  PutU32(&out, data_bytes);
  for (double s : buf.samples) {
    double code = std::clamp(std::round(s * 32768.0), -32768.0, 32767.0);
    PutU16(&out, static_cast<uint16_t>(static_cast<int16_t>(code)));
  }
  return out;
}

void WriteWavFile(const std::string& path, const AudioBuffer& buf) {
  std::vector<uint8_t> bytes = EncodeWavPcm16(buf);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "short write to " + path);
}

AudioBuffer Resample(const AudioBuffer& buf, int target_hz) {
  const int source_hz = buf.sample_rate_hz;
  if (source_hz < kMinRate || target_hz < kMinRate)
    throw Error(ErrorCode::kRateOutOfRange,
                std::to_string(source_hz) + " -> " + std::to_string(target_hz));
  if (source_hz == target_hz) return buf;

  // Output sample n sits at source position n * step / phases, so the
  // fractional offset cycles through `phases` distinct values.
  const long g = std::gcd(source_hz, target_hz);
  const long step = source_hz / g;
  const long phases = target_hz / g;
  const size_t n_in = buf.samples.size();
  const size_t n_out = static_cast<size_t>(
      std::llround(static_cast<double>(n_in) * target_hz / source_hz));

  // Cutoff as a fraction of the source Nyquist; the kernel is expressed in
  // source-sample units.
  const double cutoff = kCutoffFraction * std::min(source_hz, target_hz) / source_hz;
  const double half_width = kZeroCrossings / cutoff;
  const long reach = static_cast<long>(std::ceil(half_width));
  const size_t taps = static_cast<size_t>(2 * reach + 2);
  const double i0_beta = std::cyl_bessel_i(0.0, kKaiserBeta);

  auto kernel = [&](double u) {
    if (std::abs(u) > half_width) return 0.0;
    const double x = cutoff * u;
    const double sinc =
        x == 0.0 ? 1.0 : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
    const double r = u / half_width;
    const double window =
        std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(std::max(0.0, 1.0 - r * r))) /
        i0_beta;
    return cutoff * sinc * window;
  };
  // Taps for one phase, covering source offsets -reach .. reach + 1 around
  // floor(t).
  auto phase_taps = [&](long phase, std::vector<double>* out) {
    const double frac = static_cast<double>(phase) / static_cast<double>(phases);
    out->resize(taps);
    for (size_t j = 0; j < taps; ++j) {
      (*out)[j] = kernel(frac - static_cast<double>(static_cast<long>(j) - reach));
    }
  };

  constexpr long kMaxCachedPhases = 4096;
  std::vector<std::vector<double>> cache;
  if (phases <= kMaxCachedPhases) {
    cache.resize(static_cast<size_t>(phases));
    for (long p = 0; p < phases; ++p) phase_taps(p, &cache[static_cast<size_t>(p)]);
  }

  AudioBuffer out;
  out.sample_rate_hz = target_hz;
  out.samples.resize(n_out);
  std::vector<double> scratch;
  for (size_t n = 0; n < n_out; ++n) {
    const long long pos = static_cast<long long>(n) * step;
    const long base = static_cast<long>(pos / phases);
    const long phase = static_cast<long>(pos % phases);
    const std::vector<double>* h = &scratch;
    if (cache.empty()) {
      phase_taps(phase, &scratch);
    } else {
      h = &cache[static_cast<size_t>(phase)];
    }
    double acc = 0.0;
    for (size_t j = 0; j < taps; ++j) {
      const long k = base + static_cast<long>(j) - reach;
      if (k < 0 || k >= static_cast<long>(n_in)) continue;
      acc += buf.samples[static_cast<size_t>(k)] * (*h)[j];
    }
    out.samples[n] = acc;
  }
  return out;
}

AudioBuffer PeakNormalize(const AudioBuffer& buf) {
  double peak = 0.0;
  for (double s : buf.samples) peak = std::max(peak, std::abs(s));
  if (peak == 0.0) return buf;
  AudioBuffer out = buf;
  for (double& s : out.samples) s *= 0.95 / peak;
  return out;
}

AudioBuffer Canonicalize(const AudioBuffer& buf, bool peak_normalize) {
  if (buf.samples.empty()) throw Error(ErrorCode::kEmptyAudio, "empty buffer");
  AudioBuffer out = Resample(buf, kCanonicalSampleRate);
  for (double& s : out.samples) s = std::clamp(s, -1.0, 1.0);
  return peak_normalize ? PeakNormalize(out) : out;
}

}  // namespace agv
