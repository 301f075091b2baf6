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

#include "selftest.h"

#include <cmath>
#include <cstdio>
#include <random>

#include "aggregation.h"
#include "dsp_frontend.h"
#include "error.h"
#include "nn_core.h"
#include "synth.h"
#include "weights_io.h"

namespace agv {
namespace {

constexpr double kToneTolHz = 0.5;
constexpr double kToneFraction = 0.95;
constexpr double kGradTol = 1e-6;
constexpr double kNegativeControl = 1e-2;
constexpr size_t kMaxProbed = 64;

class Reporter {
 public:
  void Check(bool ok, const std::string& line) {
    passed_ = passed_ && ok;
    text_ += (ok ? "PASS  " : "FAIL  ") + line + "\n";
  }
  SelfTestReport Finish() { return {passed_, text_}; }

 private:
  bool passed_ = true;
  std::string text_;
};

std::string Fmt(const char* format, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, format, a, b);
  return buf;
}

Tensor RandomMatrix(std::mt19937_64& gen, size_t rows, size_t cols) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Tensor t = Tensor::Matrix(rows, cols);
  for (double& v : t.data()) v = u(gen);
  return t;
}

// Fraction of interior frames within tolerance of the true pitch.
double ToneAccuracy(double freq) {
  const F0Contour c = YinF0(Sine(freq, 1.0));
  size_t good = 0, total = 0;
  for (size_t t = 1; t + 1 < c.frames.size(); ++t) {
    ++total;
    if (c.frames[t].voiced && std::abs(c.frames[t].f0_hz - freq) < kToneTolHz) ++good;
  }
  return total ? static_cast<double>(good) / static_cast<double>(total) : 0.0;
}

void DspSuite(Reporter* r) {
  for (double f : {110.0, 220.0, 440.0}) {
    const double acc = ToneAccuracy(f);
    r->Check(acc >= kToneFraction,
             Fmt("yin %.0f Hz tone: %.3f of interior frames within 0.5 Hz", f, acc));
  }
  AudioBuffer silence;
  silence.samples.assign(kCanonicalSampleRate, 0.0);
  const F0Contour c = YinF0(silence);
  bool all_unvoiced = true;
  for (const F0Frame& f : c.frames) all_unvoiced = all_unvoiced && !f.voiced && f.f0_hz == 0.0;
  r->Check(all_unvoiced, "yin silence: every frame unvoiced");
  const MelSpectrogram mel = ComputeMelSpectrogram(silence);
  r->Check(mel.num_frames() == c.frames.size(),
           Fmt("mel/F0 framing aligned (%.0f frames)", static_cast<double>(c.frames.size())));
}

void AudioFileChecks(const std::vector<std::string>& paths, Reporter* r) {
  for (const std::string& path : paths) {
    const AudioBuffer buf = Canonicalize(ReadWavFile(path));
    const MelSpectrogram mel = ComputeMelSpectrogram(buf);
    const F0Contour f0 = YinF0(buf);
    bool ok = mel.frames.AllFinite() && mel.num_frames() == f0.frames.size();
    YinParams yp;
    for (const F0Frame& f : f0.frames) {
      ok = ok && std::isfinite(f.f0_hz) &&
           (f.voiced ? (f.f0_hz >= yp.fmin_hz && f.f0_hz <= yp.fmax_hz) : f.f0_hz == 0.0);
    }
    r->Check(ok, "front-end invariants on " + path);
  }
}

void AttentionGradcheck(Reporter* r) {
  std::mt19937_64 gen(7);
  const Tensor q = RandomMatrix(gen, 3, 5), k = RandomMatrix(gen, 4, 5),
               v = RandomMatrix(gen, 4, 5), d_out = RandomMatrix(gen, 3, 5);
  const AttentionTrace trace = ScaledDotAttention(q, k, v);
  const AttentionGrads g = AttentionBackward(trace, q, k, v, d_out);

  auto objective = [&](std::span<const double> p) {
    Tensor qq = q, kk = k, vv = v;
    std::copy(p.begin(), p.begin() + 15, qq.data().begin());
    std::copy(p.begin() + 15, p.begin() + 35, kk.data().begin());
    std::copy(p.begin() + 35, p.end(), vv.data().begin());
    const Tensor out = ScaledDotAttention(qq, kk, vv).output;
    double s = 0.0;
    for (size_t i = 0; i < out.size(); ++i) s += out[i] * d_out[i];
    return s;
  };
  std::vector<double> point, analytic;
  for (const Tensor* t : {&q, &k, &v}) point.insert(point.end(), t->data().begin(), t->data().end());
  for (const Tensor* t : {&g.dq, &g.dk, &g.dv})
    analytic.insert(analytic.end(), t->data().begin(), t->data().end());

  const GradcheckReport ok = Gradcheck(objective, point, analytic);
  r->Check(ok.worst_error < kGradTol, Fmt("attention backward gradcheck: worst %.3g", ok.worst_error));

  // Flip the sign of the largest gradient entry; the checker must notice.
  size_t largest = 0;
  for (size_t i = 1; i < analytic.size(); ++i)
    if (std::abs(analytic[i]) > std::abs(analytic[largest])) largest = i;
  analytic[largest] = -analytic[largest];
  const GradcheckReport bad = Gradcheck(objective, point, analytic);
  r->Check(bad.worst_error > kNegativeControl,
           Fmt("sign-flip negative control detected: worst %.3g", bad.worst_error));
}

void ModelGradcheck(const ParamStore& store, Reporter* r) {
  const ModelConfig& config = store.meta().config;
  if (config.aggregation.mode == AggregationMode::kSe) {
    r->Check(true, "model gradcheck skipped: mode se has no attention parameters");
    return;
  }
  const AggregationFeatures features = ComputeFeatures(Sine(220.0, 0.5), store, config);
  const std::vector<std::string> names = AttentionParamNames(config);
  const auto grads = AttentionGradients(features, store, config);
  std::vector<double> analytic;
  for (const std::string& n : names) {
    const Tensor& g = grads.at(n);
    analytic.insert(analytic.end(), g.data().begin(), g.data().end());
  }
  const std::vector<double> point = FlattenParams(store, names);

  ParamStore probe = store;
  auto objective = [&](std::span<const double> p) {
    AssignFlat(&probe, names, p);
    const SpeakerEmbedding e = Aggregate(features, probe, config);
    double s = 0.0;
    for (double v : e.vector.data()) s += v;
    return s;
  };
  GradcheckOptions opts;
  if (point.size() > kMaxProbed) {
    const size_t stride = point.size() / kMaxProbed;
    for (size_t i = 0; i < kMaxProbed; ++i) opts.coordinates.push_back(i * stride);
  }
  const GradcheckReport rep = Gradcheck(objective, point, analytic, opts);
  r->Check(rep.worst_error < kGradTol,
           Fmt("model attention/fusion gradcheck over %.0f coordinates: worst %.3g",
               static_cast<double>(rep.coordinates), rep.worst_error));
}

void RoundTrip(const ParamStore& store, Reporter* r) {
  const std::vector<uint8_t> first = SerializeParams(store);
  const std::vector<uint8_t> second = SerializeParams(DeserializeParams(first));
  r->Check(first == second,
           Fmt("weight serialization round trip (%.0f bytes) is byte-identical",
               static_cast<double>(first.size())));
}

}  // namespace

SelfTestReport RunSelfTest(const SelfTestOptions& options) {
  Reporter r;
  DspSuite(&r);
  AudioFileChecks(options.audio_paths, &r);
  AttentionGradcheck(&r);

  ParamStore store;
  if (!options.weights_path.empty()) {
    store = LoadParams(options.weights_path);
  } else {
    ModelConfig desk;
    desk.backbone.channels = 16;
    desk.backbone.d_model = 8;
    desk.aggregation.n_tokens = 2;
    desk.aggregation.heads = 2;
    store = InitParams(desk, 0);
  }
  ModelGradcheck(store, &r);
  RoundTrip(store, &r);
  return r.Finish();
}

}  // namespace agv
