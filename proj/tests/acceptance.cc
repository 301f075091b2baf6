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

// Acceptance run: one PASS/FAIL line per criterion. Exit status is the number
// of failed criteria.

#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "aggregation.h"
#include "cli_runner.h"
#include "dsp_frontend.h"
#include "error.h"
#include "evaluation.h"
#include "file_util.h"
#include "json.hpp"
#include "nn_core.h"
#include "sv_backbone.h"
#include "synth.h"
#include "test_util.h"
#include "weights_io.h"

namespace agv::testing {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string Fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

// ---- 1: YIN on tones and silence -------------------------------------------

Outcome ToneSuite() {
  double worst_fraction = 1.0;
  for (double f : {110.0, 220.0, 440.0}) {
    const F0Contour c = YinF0(Sine(f, 1.0));
    size_t good = 0, interior = 0;
    for (size_t t = 1; t + 1 < c.frames.size(); ++t) {
      ++interior;
      good += c.frames[t].voiced && std::abs(c.frames[t].f0_hz - f) < 0.5;
    }
    worst_fraction = std::min(worst_fraction, static_cast<double>(good) / interior);
  }
  AudioBuffer silence;
  silence.samples.assign(22050, 0.0);
  const F0Contour s = YinF0(silence);
  size_t unvoiced = 0;
  for (const F0Frame& fr : s.frames) unvoiced += !fr.voiced;
  const double silent = static_cast<double>(unvoiced) / s.frames.size();
  return {worst_fraction >= 0.95 && silent == 1.0,
          Fmt("worst tone within 0.5 Hz %.1f%%, silence unvoiced %.1f%%", 100 * worst_fraction,
              100 * silent)};
}

// ---- 2: framing alignment ---------------------------------------------------

Outcome Framing() {
  Rng rng(2);
  size_t mismatches = 0;
  for (int i = 0; i < 50; ++i) {
    AudioBuffer b;
    b.samples.resize(rng.Int(1024, 40000));
    for (double& v : b.samples) v = 0.3 * rng.Uniform();
    const size_t expect = (b.samples.size() - 1024) / 256 + 1;
    const size_t mel = ComputeMelSpectrogram(b).num_frames();
    const size_t f0 = YinF0(b).frames.size();
    mismatches += mel != expect || f0 != expect;
  }
  return {mismatches == 0, Fmt("50 random lengths, %zu mismatches", mismatches)};
}

// ---- 3: kernels against loop oracles ---------------------------------------

Outcome OracleEquivalence() {
  Rng rng(3);
  const int kShapes = 100;
  double worst[4] = {0, 0, 0, 0};
  for (int i = 0; i < kShapes; ++i) {
    {
      const size_t tq = rng.Int(1, 6), tk = rng.Int(1, 8), d = rng.Int(1, 12), dv = rng.Int(1, 12);
      const Tensor q = Random(rng, {tq, d}), k = Random(rng, {tk, d}), v = Random(rng, {tk, dv});
      const ScaleMode mode = i % 2 ? ScaleMode::kLinear : ScaleMode::kSqrt;
      const double scale = mode == ScaleMode::kSqrt ? std::sqrt(static_cast<double>(d)) : d;
      const AttentionTrace tr = ScaledDotAttention(q, k, v, mode);
      const oracle::Attention o = oracle::Dot(ToMat(q), ToMat(k), ToMat(v), scale);
      worst[0] = std::max({worst[0], MaxAbsDiff(tr.output, o.output), MaxAbsDiff(tr.weights, o.weights)});
    }
    {
      const size_t heads = rng.Int(1, 4), d = heads * rng.Int(1, 4), tq = rng.Int(1, 3),
                   n = rng.Int(1, 6);
      const Tensor wq = Random(rng, {d, d}), wk = Random(rng, {d, d}), wv = Random(rng, {d, d}),
                   wo = Random(rng, {d, d}), bq = Random(rng, {d}), bk = Random(rng, {d}),
                   bv = Random(rng, {d}), bo = Random(rng, {d});
      const Tensor q = Random(rng, {tq, d}), kv = Random(rng, {n, d});
      const MultiHeadResult r = MultiHeadAttention(q, kv, kv, heads, {{wq, bq}, {wk, bk}, {wv, bv}, {wo, bo}});
      const oracle::MultiHead o = oracle::MultiHeadAttention(
          ToMat(q), ToMat(kv), ToMat(kv), heads, {ToMat(wq), bq.values()}, {ToMat(wk), bk.values()},
          {ToMat(wv), bv.values()}, {ToMat(wo), bo.values()});
      worst[1] = std::max({worst[1], MaxAbsDiff(r.output, o.output),
                           MaxAbsDiff(r.head_weights, o.head_weights)});
    }
    {
      const int scale = i % 3 == 0 ? 4 : 8;
      const size_t c = static_cast<size_t>(scale) * rng.Int(1, 3), t = rng.Int(1, 12);
      const int dilation = static_cast<int>(rng.Int(1, 4));
      const Res2Owner w(rng, c, scale);
      const Tensor x = Random(rng, {t, c});
      worst[2] = std::max(worst[2], MaxAbsDiff(Res2Block(x, dilation, scale, w.View()),
                                               oracle::Res2(ToMat(x), dilation, scale, w.Oracle())));
    }
    {
      const size_t c = rng.Int(1, 12), b = rng.Int(1, 6), t = rng.Int(1, 15);
      const Tensor h = Random(rng, {t, c}), w1 = Random(rng, {c, b}), b1 = Random(rng, {b}),
                   w2 = Random(rng, {b, c}), b2 = Random(rng, {c});
      const Tensor s = AttentiveStatsPooling(h, {{w1, b1}, {w2, b2}});
      worst[3] = std::max(worst[3], MaxAbsDiff(s.data(), oracle::StatsPool(ToMat(h), {ToMat(w1), b1.values()},
                                                                             {ToMat(w2), b2.values()})));
    }
  }
  const double all = std::max({worst[0], worst[1], worst[2], worst[3]});
  return {all <= 1e-10,
          Fmt("%d shapes each; worst |diff| attention %.2g, multi-head %.2g, res2 %.2g, pooling %.2g",
              kShapes, worst[0], worst[1], worst[2], worst[3])};
}

// ---- 4: attention backward gradcheck ---------------------------------------

double Contract(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Outcome Gradients() {
  Rng rng(4);
  double worst = 0.0;
  double flipped = 0.0;
  bool flip_detected = false;
  for (int i = 0; i < 20; ++i) {
    const size_t tq = rng.Int(1, 5), tk = rng.Int(1, 6), d = rng.Int(1, 8), dv = rng.Int(1, 8);
    const Tensor q = Random(rng, {tq, d}), k = Random(rng, {tk, d}), v = Random(rng, {tk, dv});
    const Tensor dout = Random(rng, {tq, dv});
    const ScaleMode mode = i % 2 ? ScaleMode::kLinear : ScaleMode::kSqrt;
    const AttentionGrads g = AttentionBackward(ScaledDotAttention(q, k, v, mode), q, k, v, dout);
    auto loss = [&](int which) {
      return [&, which](std::span<const double> flat) {
        Tensor qq = q, kk = k, vv = v;
        Tensor& target = which == 0 ? qq : which == 1 ? kk : vv;
        std::copy(flat.begin(), flat.end(), target.data().begin());
        return Contract(ScaledDotAttention(qq, kk, vv, mode).output, dout);
      };
    };
    const Tensor* grads[3] = {&g.dq, &g.dk, &g.dv};
    const Tensor* points[3] = {&q, &k, &v};
    for (int w = 0; w < 3; ++w) {
      const GradcheckReport r = Gradcheck(loss(w), points[w]->data(), grads[w]->data());
      worst = std::max(worst, r.worst_error);
    }
    if (i == 0) {
      // Negative control: flip the sign of the largest dq entry.
      Tensor bad = g.dq;
      size_t arg = 0;
      for (size_t j = 1; j < bad.size(); ++j)
        if (std::abs(bad[j]) > std::abs(bad[arg])) arg = j;
      bad[arg] = -bad[arg];
      const GradcheckReport r = Gradcheck(loss(0), q.data(), bad.data());
      flipped = r.worst_error;
      flip_detected = !r.passed && r.worst_error > 1e-2;
    }
  }
  return {worst <= 1e-6 && flip_detected,
          Fmt("20 instances, worst relative error %.2g; sign-flip control error %.3g", worst,
              flipped)};
}

// ---- 5: convexity -----------------------------------------------------------

Outcome Convexity() {
  Rng rng(5);
  size_t violations = 0, checked = 0;
  for (int i = 0; i < 100; ++i) {
    const size_t tq = rng.Int(1, 6), tk = rng.Int(1, 10), d = rng.Int(1, 10), dv = rng.Int(1, 10);
    // Mix mild and sharp logit scales.
    const double amp = i % 4 == 0 ? 6.0 : 1.0;
    const Tensor q = Random(rng, {tq, d}, -amp, amp), k = Random(rng, {tk, d}, -amp, amp);
    const Tensor v = Random(rng, {tk, dv}, -3.0, 3.0);
    const Tensor out = ScaledDotAttention(q, k, v).output;
    for (size_t c = 0; c < dv; ++c) {
      double lo = v(0, c), hi = v(0, c);
      for (size_t t = 1; t < tk; ++t) {
        lo = std::min(lo, v(t, c));
        hi = std::max(hi, v(t, c));
      }
      for (size_t r = 0; r < tq; ++r) {
        ++checked;
        violations += out(r, c) < lo || out(r, c) > hi;
      }
    }
  }
  return {violations == 0, Fmt("100 calls, %zu coordinates, %zu violations", checked, violations)};
}

// ---- 6: singleton-key degeneracy --------------------------------------------

Outcome SingletonKey() {
  Rng rng(6);
  const size_t d = 8;
  const Tensor wq = Random(rng, {d, d}), wk = Random(rng, {d, d}), wv = Random(rng, {d, d});
  const Tensor bq = Random(rng, {d}), bk = Random(rng, {d}), bv = Random(rng, {d});
  const CrossAttentionParams p{{wq, bq}, {wk, bk}, {wv, bv}};
  const Tensor prompt = Random(rng, {1, d});
  std::vector<Tensor> outs;
  for (int i = 0; i < 10; ++i)
    outs.push_back(CrossAttention(Random(rng, {1, d}, -5.0, 5.0), prompt, p, ScaleMode::kSqrt).output);
  double spread = 0.0;
  for (size_t j = 0; j < d; ++j) {
    double lo = outs[0][j], hi = outs[0][j];
    for (const Tensor& o : outs) {
      lo = std::min(lo, o[j]);
      hi = std::max(hi, o[j]);
    }
    spread = std::max(spread, hi - lo);
  }
  return {spread <= 1e-12, Fmt("10 queries against one key, max spread %.3g", spread)};
}

// ---- 7: mode matrix ----------------------------------------------------------

Outcome ModeMatrix() {
  const AudioBuffer audio = SynthVoice(VoiceSpec{}, 0.5, 7);
  size_t ok = 0;
  double full_rel = 0.0;
  std::string bad;
  for (AggregationMode mode : {AggregationMode::kSe, AggregationMode::kSeF0, AggregationMode::kSeMe,
                               AggregationMode::kSeF0ThenMe, AggregationMode::kSeMeThenF0}) {
    for (bool split : {true, false}) {
      const ModelConfig config = DeskConfig(mode, split);
      const ParamStore p = InitParams(config, 7);
      try {
        const SpeakerEmbedding e = ExtractEmbedding(audio, p, config);
        if (e.vector.size() == 8 && e.vector.AllFinite()) {
          ++ok;
        } else {
          bad += " " + std::string(ModeName(mode));
        }
        if (mode == AggregationMode::kSeF0ThenMe) {
          oracle::PipelineConfig pc;
          pc.mode = std::string(ModeName(mode));
          pc.splitting = split;
          pc.heads = 2;
          full_rel = std::max(full_rel, MaxRelDiff(e.vector.data(),
                                                   oracle::Embed(audio.samples, ToWeights(p), pc)));
        }
      } catch (const std::exception& ex) {
        bad += " " + std::string(ModeName(mode)) + ":" + ex.what();
      }
    }
  }
  return {ok == 10 && full_rel <= 1e-8,
          Fmt("%zu/10 runs finite 8-dim%s; full pipeline vs composed oracle rel %.2g", ok,
              bad.c_str(), full_rel)};
}

// ---- shared corpus for the CLI criteria -------------------------------------

struct Utterance {
  std::string id, speaker;
  double f0, tilt;
  uint64_t seed;
};

fs::path WriteCorpus(const fs::path& dir, const std::vector<Utterance>& utts, double seconds) {
  fs::create_directories(dir / "wav");
  std::ofstream m(dir / "manifest.jsonl");
  for (const Utterance& u : utts) {
    const std::string rel = "wav/" + u.id + ".wav";
    RunCli({"synth", "--f0", Fmt("%.6g", u.f0), "--tilt", Fmt("%.6g", u.tilt), "--seconds",
            Fmt("%.6g", seconds), "--seed", std::to_string(u.seed), "--out", (dir / rel).string()});
    m << json{{"utterance_id", u.id}, {"path", rel}, {"speaker_id", u.speaker}, {"language", "xx"}}.dump()
      << "\n";
  }
  return dir / "manifest.jsonl";
}

// ---- 8: determinism through the CLI -----------------------------------------

Outcome Determinism(const fs::path& root) {
  std::vector<Utterance> utts;
  for (int i = 0; i < 5; ++i)
    utts.push_back({"utt" + std::to_string(i), "s" + std::to_string(i % 2), 100.0 + 35.0 * i,
                    -4.0 - i, static_cast<uint64_t>(i + 1)});
  const fs::path manifest = WriteCorpus(root / "det", utts, 1.0);
  auto embed = [&](const std::string& out, const std::string& seed) {
    return RunCli({"embed", "--manifest", manifest.string(), "--seed", seed, "--out",
                   (root / "det" / out).string()})
        .exit_code;
  };
  if (embed("a", "11") || embed("b", "11") || embed("c", "12"))
    return {false, "embed exited non-zero"};
  size_t same = 0, changed = 0;
  for (const Utterance& u : utts) {
    const std::string f = u.id + ".json";
    const std::string a = Slurp(root / "det" / "a" / f);
    same += !a.empty() && a == Slurp(root / "det" / "b" / f);
    changed += a != Slurp(root / "det" / "c" / f);
  }
  return {same == 5 && changed >= 1,
          Fmt("same seed: %zu/5 files byte-identical; new seed: %zu/5 files changed", same, changed)};
}

// ---- 9: synthetic speakers ---------------------------------------------------

// unit_diagonal holds when rows and columns are the same embeddings.
bool WellFormedMatrix(const fs::path& prefix, size_t n, bool unit_diagonal, std::string* why) {
  const std::vector<std::string> rows = Lines(Slurp(prefix.string() + ".csv"));
  if (rows.size() != n + 1) {
    *why = "csv rows " + std::to_string(rows.size());
    return false;
  }
  for (size_t r = 1; r <= n; ++r) {
    std::istringstream in(rows[r]);
    std::string cell;
    std::getline(in, cell, ',');
    size_t cols = 0;
    while (std::getline(in, cell, ',')) {
      const double v = std::stod(cell);
      if (!(v >= -1.0 - 1e-9 && v <= 1.0 + 1e-9)) {
        *why = "value out of range";
        return false;
      }
      if (unit_diagonal && cols == r - 1 && std::abs(v - 1.0) > 1e-6) {
        *why = "diagonal not 1";
        return false;
      }
      ++cols;
    }
    if (cols != n) {
      *why = "csv columns " + std::to_string(cols);
      return false;
    }
  }
  const std::string pgm = Slurp(prefix.string() + ".pgm");
  const std::string head = Fmt("P5\n%zu %zu\n255\n", n, n);
  if (pgm.size() != head.size() + n * n || pgm.compare(0, head.size(), head) != 0) {
    *why = "pgm layout";
    return false;
  }
  return true;
}

double ParseDominance(const std::string& out) {
  const size_t at = out.find("diagonal_dominance=");
  return at == std::string::npos ? -1.0 : std::stod(out.substr(at + 19));
}

Outcome SyntheticSpeakers(const fs::path& root) {
  const double f0s[4] = {110, 160, 220, 310}, tilts[4] = {-3, -6, -9, -12};
  std::vector<Utterance> utts;
  for (int s = 0; s < 4; ++s)
    for (int u = 0; u < 3; ++u)
      utts.push_back({Fmt("spk%d_u%d", s, u), Fmt("spk%d", s), f0s[s] * (1.0 + 0.015 * (u - 1)),
                      tilts[s], static_cast<uint64_t>(100 + 10 * s + u)});
  const fs::path dir = root / "spk";
  const fs::path manifest = WriteCorpus(dir, utts, 1.0);

  if (RunCli({"embed", "--manifest", manifest.string(), "--mel-stats", "--out", (dir / "mel").string()})
          .exit_code != 0)
    return {false, "mel-stats embed failed"};
  const CliResult group = RunCli({"simmatrix", "--index", (dir / "mel" / "index.json").string(),
                                  "--group-by", "speaker", "--out", (dir / "mel_groups").string()});
  const double dominance = ParseDominance(group.out);
  std::string why;
  const bool group_ok = group.exit_code == 0 && WellFormedMatrix(dir / "mel_groups", 4, false, &why);

  if (RunCli({"embed", "--manifest", manifest.string(), "--seed", "9", "--out", (dir / "nn").string()})
          .exit_code != 0)
    return {false, "neural embed failed"};
  const CliResult utt = RunCli({"simmatrix", "--index", (dir / "nn" / "index.json").string(), "--out",
                                (dir / "nn_utts").string()});
  std::string why_nn;
  const bool nn_ok = utt.exit_code == 0 && WellFormedMatrix(dir / "nn_utts", 12, true, &why_nn);
  return {group_ok && dominance >= 0.75 && nn_ok,
          Fmt("mel-stats 4x4 group dominance %.3g%s; neural 12x12 csv+pgm %s", dominance,
              group_ok ? "" : (" (" + why + ")").c_str(), nn_ok ? "well-formed" : why_nn.c_str())};
}

// ---- 10: serialization ---------------------------------------------------------

ErrorCode LoadCode(const fs::path& p) {
  try {
    LoadParams(p.string());
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInternal;
}

Outcome Serialization(const fs::path& root) {
  const ModelConfig config;  // full-size defaults
  const ParamStore p = InitParams(config, 10);
  const fs::path dir = root / "ser";
  fs::create_directories(dir);
  const fs::path path = dir / "w.agvw";
  SaveParams(p, path.string());
  const ParamStore back = LoadParams(path.string());
  const std::vector<uint8_t> bytes = ReadFileBytes(path.string());
  SaveParams(back, (dir / "again.agvw").string());
  bool exact = ReadFileBytes((dir / "again.agvw").string()) == bytes;
  for (const auto& [name, t] : p.entries()) {
    const Tensor& u = back.Get(name);
    for (size_t i = 0; i < t.size() && exact; ++i)
      exact = u[i] == static_cast<double>(static_cast<float>(t[i]));
  }

  const AudioBuffer audio = SynthVoice(VoiceSpec{}, 1.0, 10);
  const Tensor a = ExtractEmbedding(audio, p, config).vector;
  const Tensor b = ExtractEmbedding(audio, back, config).vector;
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    num = std::max(num, std::abs(a[i] - b[i]));
    den = std::max(den, std::abs(a[i]));
  }
  const double drift = num / den;

  auto write = [&](const std::string& name, const std::vector<uint8_t>& data) {
    WriteFileAtomic((dir / name).string(), std::span<const uint8_t>(data));
    return dir / name;
  };
  std::vector<uint8_t> magic = bytes;
  magic[0] = 'X';
  std::vector<uint8_t> cut(bytes.begin(), bytes.begin() + static_cast<long>(bytes.size() / 2));
  // Edit one declared shape in place, keeping the header length.
  std::vector<uint8_t> shape = bytes;
  const uint32_t len = bytes[8] | (bytes[9] << 8) | (bytes[10] << 16) | (static_cast<uint32_t>(bytes[11]) << 24);
  const std::string header(bytes.begin() + 12, bytes.begin() + 12 + len);
  const size_t at = header.find("\"shape\":[");
  bool edited = false;
  if (at != std::string::npos) {
    const size_t digit = at + 9;
    char& c = reinterpret_cast<char&>(shape[12 + digit]);
    c = c == '9' ? '8' : static_cast<char>(c + 1);
    edited = true;
  }
  const ErrorCode c1 = LoadCode(write("magic.agvw", magic));
  const ErrorCode c2 = LoadCode(write("cut.agvw", cut));
  const ErrorCode c3 = LoadCode(write("shape.agvw", shape));
  const bool corrupt = c1 == ErrorCode::kBadMagic && c2 == ErrorCode::kTruncatedPayload && edited &&
                       c3 == ErrorCode::kHeaderMismatch;
  return {exact && drift <= 1e-5 && corrupt,
          Fmt("round trip %s; f32 drift %.2g relative; corruption -> %s, %s, %s",
              exact ? "bit-exact" : "NOT exact", drift, ErrorCodeName(c1), ErrorCodeName(c2),
              ErrorCodeName(c3))};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;  // 0 = no runtime bound
  std::function<Outcome()> run;
};

}  // namespace
}  // namespace agv::testing

int main() {
  using namespace agv::testing;
  const fs::path root = ScratchDir("acceptance");
  const std::vector<Criterion> criteria = {
      {1, "DSP tone suite", 5, ToneSuite},
      {2, "framing alignment", 0, Framing},
      {3, "attention oracle equivalence", 30, OracleEquivalence},
      {4, "gradient verification", 30, Gradients},
      {5, "convexity invariant", 0, Convexity},
      {6, "singleton-key degeneracy", 0, SingletonKey},
      {7, "mode matrix", 0, ModeMatrix},
      {8, "determinism", 0, [&] { return Determinism(root); }},
      {9, "synthetic speakers", 60, [&] { return SyntheticSpeakers(root); }},
      {10, "serialization", 0, [&] { return Serialization(root); }},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::string timing = Fmt("%.2f s", secs);
    if (c.budget_s > 0) {
      timing += Fmt(" of %.0f s", c.budget_s);
      if (secs >= c.budget_s) o.pass = false;
    }
    failed += !o.pass;
    std::printf("%s %d %s: %s [%s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                timing.c_str());
    std::fflush(stdout);
  }
  fs::remove_all(root);
  return failed;
}
