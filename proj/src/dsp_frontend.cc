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

#include "dsp_frontend.h"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <utility>

#include "error.h"

namespace agv {
namespace {

constexpr double kMinLogHz = 1000.0;
constexpr double kLinearHzPerMel = 200.0 / 3.0;
constexpr double kMinLogMel = kMinLogHz / kLinearHzPerMel;  // 15
const double kLogStep = std::log(6.4) / 27.0;

// FFTW plans are created once per size and executed with the new-array API,
// which is safe to call concurrently.
class RealFft {
 public:
  explicit RealFft(int n) : n_(n) {
    double* in = fftw_alloc_real(static_cast<size_t>(n));
    fftw_complex* out = fftw_alloc_complex(static_cast<size_t>(n / 2 + 1));
    plan_ = fftw_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(in);
    fftw_free(out);
  }
  ~RealFft() { fftw_destroy_plan(plan_); }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  void Forward(double* in, fftw_complex* out) const {
    fftw_execute_dft_r2c(plan_, in, out);
  }
  int size() const { return n_; }

 private:
  int n_;
  fftw_plan plan_;
};

const RealFft& FftForSize(int n) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<RealFft>> plans;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = plans[n];
  if (!slot) slot = std::make_unique<RealFft>(n);
  return *slot;
}

std::vector<double> PeriodicHann(int n) {
  std::vector<double> w(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    w[static_cast<size_t>(i)] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n);
  return w;
}

void CheckFraming(const MelParams& p) {
  if (p.n_fft <= 0 || p.win_length <= 0 || p.hop_length <= 0 || p.n_mels <= 0 ||
      p.win_length > p.n_fft)
    throw Error(ErrorCode::kInvalidArgument, "invalid STFT framing parameters");
}

}  // namespace

size_t FrameCount(size_t n_samples, int win_length, int hop_length) {
  const size_t win = static_cast<size_t>(win_length);
  if (n_samples < win) return 0;
  return (n_samples - win) / static_cast<size_t>(hop_length) + 1;
}

double HzToMel(double hz) {
  if (hz < kMinLogHz) return hz / kLinearHzPerMel;
  return kMinLogMel + std::log(hz / kMinLogHz) / kLogStep;
}

double MelToHz(double mel) {
  if (mel < kMinLogMel) return mel * kLinearHzPerMel;
  return kMinLogHz * std::exp(kLogStep * (mel - kMinLogMel));
}

std::vector<double> MelCenterFrequencies(const MelParams& params) {
  const double lo = HzToMel(params.fmin_hz);
  const double hi = HzToMel(params.fmax_hz);
  const int points = params.n_mels + 2;
  std::vector<double> centers(static_cast<size_t>(params.n_mels));
  for (int m = 0; m < params.n_mels; ++m) {
    centers[static_cast<size_t>(m)] = MelToHz(lo + (hi - lo) * (m + 1) / (points - 1));
  }
  return centers;
}

Tensor StftMagnitude(const AudioBuffer& buf, const MelParams& params) {
  CheckFraming(params);
  const size_t frames = FrameCount(buf.samples.size(), params.win_length, params.hop_length);
  if (frames == 0)
    throw Error(ErrorCode::kTooShort, std::to_string(buf.samples.size()) +
                                          " samples, need at least " +
                                          std::to_string(params.win_length));
  const int n_fft = params.n_fft;
  const size_t bins = static_cast<size_t>(n_fft / 2 + 1);
  const RealFft& fft = FftForSize(n_fft);
  const std::vector<double> window = PeriodicHann(params.win_length);
  // A window shorter than n_fft is centred inside the transform frame.
  const size_t pad = static_cast<size_t>((n_fft - params.win_length) / 2);

  Tensor mag = Tensor::Matrix(frames, bins);
  std::vector<double> frame(static_cast<size_t>(n_fft));
  std::vector<fftw_complex> spectrum(bins);
  for (size_t t = 0; t < frames; ++t) {
    std::fill(frame.begin(), frame.end(), 0.0);
    const size_t start = t * static_cast<size_t>(params.hop_length);
    for (size_t i = 0; i < window.size(); ++i)
      frame[pad + i] = buf.samples[start + i] * window[i];
    fft.Forward(frame.data(), spectrum.data());
    for (size_t k = 0; k < bins; ++k)
      mag(t, k) = std::hypot(spectrum[k][0], spectrum[k][1]);
  }
  return mag;
}

Tensor MelFilterbank(const MelParams& params) {
  CheckFraming(params);
  if (!(params.fmin_hz >= 0.0 && params.fmin_hz < params.fmax_hz &&
        params.fmax_hz <= params.sample_rate / 2.0))
    throw Error(ErrorCode::kInvalidArgument, "mel band must satisfy 0 <= fmin < fmax <= sr/2");

  const size_t bins = static_cast<size_t>(params.n_fft / 2 + 1);
  const double bin_hz = static_cast<double>(params.sample_rate) / params.n_fft;
  size_t bins_in_band = 0;
  for (size_t k = 0; k < bins; ++k) {
    const double f = k * bin_hz;
    if (f >= params.fmin_hz && f <= params.fmax_hz) ++bins_in_band;
  }
  if (bins_in_band < static_cast<size_t>(params.n_mels))
    throw Error(ErrorCode::kDegenerateBand,
                std::to_string(bins_in_band) + " FFT bins for " +
                    std::to_string(params.n_mels) + " mel bands");

  // n_mels + 2 edge frequencies equally spaced in mel.
  const double lo = HzToMel(params.fmin_hz);
  const double hi = HzToMel(params.fmax_hz);
  std::vector<double> edges(static_cast<size_t>(params.n_mels + 2));
  for (size_t i = 0; i < edges.size(); ++i)
    edges[i] = MelToHz(lo + (hi - lo) * static_cast<double>(i) / (edges.size() - 1));

  Tensor bank = Tensor::Matrix(static_cast<size_t>(params.n_mels), bins);
  for (size_t m = 0; m < bank.rows(); ++m) {
    const double f_lo = edges[m], f_c = edges[m + 1], f_hi = edges[m + 2];
    const double norm = 2.0 / (f_hi - f_lo);
    bool any = false;
    for (size_t k = 0; k < bins; ++k) {
      const double f = k * bin_hz;
      const double rise = (f - f_lo) / (f_c - f_lo);
      const double fall = (f_hi - f) / (f_hi - f_c);
      const double w = std::max(0.0, std::min(rise, fall));
      bank(m, k) = w * norm;
      any = any || w > 0.0;
    }
    if (!any)
      throw Error(ErrorCode::kDegenerateBand,
                  "mel filter " + std::to_string(m) + " covers no FFT bin");
  }
  return bank;
}

MelSpectrogram ComputeMelSpectrogram(const AudioBuffer& buf, const MelParams& params) {
  if (buf.sample_rate_hz != params.sample_rate)
    throw Error(ErrorCode::kRateOutOfRange,
                "mel front-end expects " + std::to_string(params.sample_rate) +
                    " Hz, got " + std::to_string(buf.sample_rate_hz));
  const Tensor mag = StftMagnitude(buf, params);

  static std::mutex mu;
  static MelParams cached_params;
  static Tensor cached_bank;
  Tensor bank;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto same = [](const MelParams& a, const MelParams& b) {
      return a.n_fft == b.n_fft && a.n_mels == b.n_mels &&
             a.sample_rate == b.sample_rate && a.fmin_hz == b.fmin_hz &&
             a.fmax_hz == b.fmax_hz;
    };
    if (cached_bank.empty() || !same(cached_params, params)) {
      cached_bank = MelFilterbank(params);
      cached_params = params;
    }
    bank = cached_bank;
  }

  MelSpectrogram mel;
  mel.params = params;
  mel.frames = Tensor::Matrix(mag.rows(), bank.rows());
  for (size_t t = 0; t < mag.rows(); ++t) {
    auto spec = mag.row(t);
    for (size_t m = 0; m < bank.rows(); ++m) {
      auto filt = bank.row(m);
      double acc = 0.0;
      for (size_t k = 0; k < filt.size(); ++k) acc += filt[k] * spec[k];
      mel.frames(t, m) = std::log(std::max(acc, kMelFloor));
    }
  }
  return mel;
}

F0Contour YinF0(const AudioBuffer& buf, const YinParams& params) {
  const size_t win = static_cast<size_t>(params.win_length);
  const size_t frames = FrameCount(buf.samples.size(), params.win_length, params.hop_length);
  if (frames == 0)
    throw Error(ErrorCode::kTooShort, std::to_string(buf.samples.size()) +
                                          " samples, need at least " +
                                          std::to_string(params.win_length));
  const double sr = buf.sample_rate_hz;
  const size_t max_lag = win / 2;
  // Lag band for the pitch search; one lag of headroom on each side for the
  // parabolic fit.
  const size_t lag_lo = std::max<size_t>(
      2, static_cast<size_t>(std::ceil(sr / params.fmax_hz)));
  const size_t lag_hi = std::min<size_t>(
      max_lag - 1, static_cast<size_t>(std::floor(sr / params.fmin_hz)));
  if (lag_lo > lag_hi)
    throw Error(ErrorCode::kInvalidArgument, "empty YIN lag range");

  F0Contour contour;
  contour.hop_length = params.hop_length;
  contour.win_length = params.win_length;
  contour.frames.resize(frames);

  std::vector<double> diff(max_lag + 1);
  std::vector<double> cmnd(max_lag + 1);
  for (size_t t = 0; t < frames; ++t) {
    const double* x = buf.samples.data() + t * static_cast<size_t>(params.hop_length);

    double energy = 0.0;
    for (size_t j = 0; j < win; ++j) energy += x[j] * x[j];
    const double rms = std::sqrt(energy / static_cast<double>(win));

    diff[0] = 0.0;
    for (size_t lag = 1; lag <= max_lag; ++lag) {
      double acc = 0.0;
      for (size_t j = 0; j + lag < win; ++j) {
        const double delta = x[j] - x[j + lag];
        acc += delta * delta;
      }
      diff[lag] = acc;
    }
    cmnd[0] = 1.0;
    double running = 0.0;
    for (size_t lag = 1; lag <= max_lag; ++lag) {
      running += diff[lag];
      cmnd[lag] = running > 0.0 ? diff[lag] * static_cast<double>(lag) / running : 1.0;
    }

    size_t best = 0;
    for (size_t lag = lag_lo; lag <= lag_hi; ++lag) {
      if (cmnd[lag] < params.threshold && cmnd[lag] <= cmnd[lag - 1] &&
          cmnd[lag] <= cmnd[lag + 1]) {
        best = lag;
        break;
      }
    }
    if (best == 0) {
      best = lag_lo;
      for (size_t lag = lag_lo + 1; lag <= lag_hi; ++lag)
        if (cmnd[lag] < cmnd[best]) best = lag;
    }

    const double a = cmnd[best - 1], b = cmnd[best], c = cmnd[best + 1];
    const double curvature = a - 2.0 * b + c;
    double offset = curvature > 0.0 ? 0.5 * (a - c) / curvature : 0.0;
    offset = std::clamp(offset, -0.5, 0.5);

    F0Frame& out = contour.frames[t];
    out.cmnd_min = std::max(0.0, b);
    out.voiced = b <= params.unvoiced_cmnd && rms >= params.rms_floor;
    out.f0_hz = out.voiced ? std::clamp(sr / (static_cast<double>(best) + offset),
                                        params.fmin_hz, params.fmax_hz)
                           : 0.0;
  }
  return contour;
}

}  // namespace agv
