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

#include "oracle.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace oracle {

namespace {

constexpr long double kPi = 3.141592653589793238462643383279502884L;

double Sigm(double v) { return 1.0 / (1.0 + std::exp(-v)); }

Mat Columns(const Mat& x, size_t begin, size_t count) {
  Mat out(x.size(), Vec(count));
  for (size_t t = 0; t < x.size(); ++t)
    for (size_t c = 0; c < count; ++c) out[t][c] = x[t][begin + c];
  return out;
}

Vec TimeMean(const Mat& x) {
  Vec m(x.empty() ? 0 : x[0].size(), 0.0);
  for (const Vec& row : x)
    for (size_t c = 0; c < row.size(); ++c) m[c] += row[c];
  for (double& v : m) v /= static_cast<double>(x.size());
  return m;
}

Mat CrossAttention(const Mat& query, const Mat& kv, const Weights& w, const std::string& prefix,
                   bool linear) {
  const Mat q = Affine(query, w.Matrix(prefix + ".q.weight"), w.Vector(prefix + ".q.bias"));
  const Mat k = Affine(kv, w.Matrix(prefix + ".k.weight"), w.Vector(prefix + ".k.bias"));
  const Mat v = Affine(kv, w.Matrix(prefix + ".v.weight"), w.Vector(prefix + ".v.bias"));
  const double d = static_cast<double>(q[0].size());
  return Dot(q, k, v, linear ? d : std::sqrt(d)).output;
}

}  // namespace

Mat Affine(const Mat& x, const Mat& w, const Vec& b) {
  const size_t in = w.size(), out = w[0].size();
  Mat y(x.size(), Vec(out));
  for (size_t t = 0; t < x.size(); ++t) {
    if (x[t].size() != in) throw std::invalid_argument("oracle affine shape");
    for (size_t o = 0; o < out; ++o) {
      double acc = b[o];
      for (size_t i = 0; i < in; ++i) acc += x[t][i] * w[i][o];
      y[t][o] = acc;
    }
  }
  return y;
}

Mat Conv1d(const Mat& x, const Kernel& k, const Vec& b, int dilation) {
  const size_t co = k.size(), ci = k[0].size(), taps = k[0][0].size();
  const long frames = static_cast<long>(x.size());
  const long centre = static_cast<long>(taps - 1) / 2;
  Mat y(x.size(), Vec(co, 0.0));
  for (long t = 0; t < frames; ++t)
    for (size_t o = 0; o < co; ++o) {
      double acc = b.empty() ? 0.0 : b[o];
      for (size_t i = 0; i < ci; ++i)
        for (size_t j = 0; j < taps; ++j) {
          const long src = t + (static_cast<long>(j) - centre) * dilation;
          if (src >= 0 && src < frames) acc += k[o][i][j] * x[static_cast<size_t>(src)][i];
        }
      y[static_cast<size_t>(t)][o] = acc;
    }
  return y;
}

Mat Relu(Mat x) {
  for (Vec& row : x)
    for (double& v : row) v = v > 0.0 ? v : 0.0;
  return x;
}

Vec SoftmaxLong(const Vec& row) {
  long double peak = row[0];
  for (double v : row) peak = std::max<long double>(peak, v);
  std::vector<long double> e(row.size());
  long double total = 0.0L;
  for (size_t i = 0; i < row.size(); ++i) {
    e[i] = std::exp(static_cast<long double>(row[i]) - peak);
    total += e[i];
  }
  Vec out(row.size());
  for (size_t i = 0; i < row.size(); ++i) out[i] = static_cast<double>(e[i] / total);
  return out;
}

Attention Dot(const Mat& q, const Mat& k, const Mat& v, double scale) {
  Attention a;
  for (const Vec& qi : q) {
    Vec logits(k.size());
    for (size_t j = 0; j < k.size(); ++j) {
      double s = 0.0;
      for (size_t c = 0; c < qi.size(); ++c) s += qi[c] * k[j][c];
      logits[j] = s / scale;
    }
    Vec p = SoftmaxLong(logits);
    Vec out(v[0].size(), 0.0);
    for (size_t j = 0; j < k.size(); ++j)
      for (size_t c = 0; c < out.size(); ++c) out[c] += p[j] * v[j][c];
    a.output.push_back(out);
    a.weights.push_back(p);
  }
  return a;
}

MultiHead MultiHeadAttention(const Mat& query, const Mat& keys, const Mat& values, size_t heads,
                             const Projection& q, const Projection& k, const Projection& v,
                             const Projection& o) {
  const Mat qp = Affine(query, q.w, q.b);
  const Mat kp = Affine(keys, k.w, k.b);
  const Mat vp = Affine(values, v.w, v.b);
  const size_t d = qp[0].size(), width = d / heads;
  Mat concat(query.size(), Vec(d, 0.0));
  MultiHead r;
  r.head_weights.assign(heads, Vec(keys.size(), 0.0));
  for (size_t h = 0; h < heads; ++h) {
    const Attention a = Dot(Columns(qp, h * width, width), Columns(kp, h * width, width),
                            Columns(vp, h * width, width), std::sqrt(static_cast<double>(width)));
    for (size_t t = 0; t < query.size(); ++t) {
      for (size_t c = 0; c < width; ++c) concat[t][h * width + c] = a.output[t][c];
      for (size_t j = 0; j < keys.size(); ++j)
        r.head_weights[h][j] += a.weights[t][j] / static_cast<double>(query.size());
    }
  }
  r.output = Affine(concat, o.w, o.b);
  return r;
}

Mat Glu(const Mat& x, const Kernel& k, const Vec& b) {
  const Mat both = Conv1d(x, k, b, 1);
  const size_t half = k.size() / 2;
  Mat y(x.size(), Vec(half));
  for (size_t t = 0; t < x.size(); ++t)
    for (size_t c = 0; c < half; ++c) y[t][c] = both[t][c] * Sigm(both[t][half + c]);
  return y;
}

Mat Se(const Mat& x, const Projection& fc1, const Projection& fc2) {
  const Vec s = TimeMean(x);
  const Mat hidden = Relu(Affine(Mat{s}, fc1.w, fc1.b));
  const Mat e = Affine(hidden, fc2.w, fc2.b);
  Mat y = x;
  for (Vec& row : y)
    for (size_t c = 0; c < row.size(); ++c) row[c] *= Sigm(e[0][c]);
  return y;
}

Mat Res2(const Mat& x, int dilation, int scale, const Res2Weights& w) {
  const size_t channels = x[0].size(), width = channels / static_cast<size_t>(scale);
  const Mat inner = Conv1d(x, w.conv_in, w.conv_in_b, 1);
  Mat merged(x.size(), Vec(channels, 0.0));
  Mat prev;
  for (int g = 0; g < scale; ++g) {
    Mat part = Columns(inner, static_cast<size_t>(g) * width, width);
    if (g > 0) {
      for (size_t t = 0; t < part.size(); ++t)
        for (size_t c = 0; c < width; ++c) part[t][c] += prev[t][c];
      part = Relu(Conv1d(part, w.group[static_cast<size_t>(g - 1)],
                         w.group_b[static_cast<size_t>(g - 1)], dilation));
    }
    for (size_t t = 0; t < part.size(); ++t)
      for (size_t c = 0; c < width; ++c) merged[t][static_cast<size_t>(g) * width + c] = part[t][c];
    prev = part;
  }
  Mat y = Se(Conv1d(merged, w.conv_out, w.conv_out_b, 1), w.se1, w.se2);
  for (size_t t = 0; t < y.size(); ++t)
    for (size_t c = 0; c < channels; ++c) y[t][c] += x[t][c];
  return y;
}

Vec StatsPool(const Mat& h, const Projection& fc1, const Projection& fc2) {
  Mat hidden = Affine(h, fc1.w, fc1.b);
  for (Vec& row : hidden)
    for (double& v : row) v = std::tanh(v);
  const Mat logits = Affine(hidden, fc2.w, fc2.b);
  const size_t channels = h[0].size();
  Vec mean(channels), stdev(channels);
  for (size_t c = 0; c < channels; ++c) {
    Vec column(h.size());
    for (size_t t = 0; t < h.size(); ++t) column[t] = logits[t][c];
    const Vec alpha = SoftmaxLong(column);
    double m1 = 0.0, m2 = 0.0;
    for (size_t t = 0; t < h.size(); ++t) {
      m1 += alpha[t] * h[t][c];
      m2 += alpha[t] * h[t][c] * h[t][c];
    }
    mean[c] = m1;
    stdev[c] = std::sqrt(std::max(m2 - m1 * m1, 1e-9));
  }
  mean.insert(mean.end(), stdev.begin(), stdev.end());
  return mean;
}

Mat StftMagnitude(const Vec& samples) {
  const size_t n = 1024, hop = 256, bins = n / 2 + 1;
  Mat out;
  if (samples.size() < n) return out;
  std::vector<long double> window(n), cos_table(n), sin_table(n);
  for (size_t i = 0; i < n; ++i) {
    window[i] = 0.5L - 0.5L * std::cos(2.0L * kPi * static_cast<long double>(i) / n);
    cos_table[i] = std::cos(2.0L * kPi * static_cast<long double>(i) / n);
    sin_table[i] = std::sin(2.0L * kPi * static_cast<long double>(i) / n);
  }
  for (size_t start = 0; start + n <= samples.size(); start += hop) {
    Vec row(bins);
    for (size_t k = 0; k < bins; ++k) {
      long double re = 0.0L, im = 0.0L;
      for (size_t i = 0; i < n; ++i) {
        const long double x = window[i] * samples[start + i];
        const size_t phase = (k * i) % n;
        re += x * cos_table[phase];
        im -= x * sin_table[phase];
      }
      row[k] = static_cast<double>(std::sqrt(re * re + im * im));
    }
    out.push_back(std::move(row));
  }
  return out;
}

double SlaneyMel(double hz) {
  const double f_sp = 200.0 / 3.0;
  if (hz < 1000.0) return hz / f_sp;
  return 1000.0 / f_sp + std::log(hz / 1000.0) / (std::log(6.4) / 27.0);
}

double SlaneyHz(double mel) {
  const double f_sp = 200.0 / 3.0;
  const double knee = 1000.0 / f_sp;
  if (mel < knee) return mel * f_sp;
  return 1000.0 * std::exp((std::log(6.4) / 27.0) * (mel - knee));
}

Mat Filterbank(int n_mels, int n_fft, int sample_rate, double fmin, double fmax) {
  const double lo = SlaneyMel(fmin), hi = SlaneyMel(fmax);
  Vec edges(static_cast<size_t>(n_mels + 2));
  for (int i = 0; i < n_mels + 2; ++i)
    edges[static_cast<size_t>(i)] = SlaneyHz(lo + (hi - lo) * i / (n_mels + 1));
  const size_t bins = static_cast<size_t>(n_fft / 2 + 1);
  Mat fb(static_cast<size_t>(n_mels), Vec(bins, 0.0));
  for (int m = 0; m < n_mels; ++m) {
    const double left = edges[static_cast<size_t>(m)], centre = edges[static_cast<size_t>(m + 1)],
                 right = edges[static_cast<size_t>(m + 2)];
    for (size_t k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / n_fft;
      const double rise = (f - left) / (centre - left);
      const double fall = (right - f) / (right - centre);
      fb[static_cast<size_t>(m)][k] = std::max(0.0, std::min(rise, fall)) * 2.0 / (right - left);
    }
  }
  return fb;
}

Mat LogMel(const Vec& samples) {
  const Mat mag = StftMagnitude(samples);
  const Mat fb = Filterbank(80, 1024, 22050, 0.0, 8000.0);
  Mat out(mag.size(), Vec(fb.size()));
  for (size_t t = 0; t < mag.size(); ++t)
    for (size_t m = 0; m < fb.size(); ++m) {
      double acc = 0.0;
      for (size_t k = 0; k < mag[t].size(); ++k) acc += fb[m][k] * mag[t][k];
      out[t][m] = std::log(std::max(acc, 1e-5));
    }
  return out;
}

Vec Cmnd(const double* frame, size_t window) {
  const size_t max_lag = window / 2;
  Vec d(max_lag + 1, 0.0);
  for (size_t tau = 1; tau <= max_lag; ++tau)
    for (size_t j = 0; j + tau < window; ++j) d[tau] += (frame[j] - frame[j + tau]) * (frame[j] - frame[j + tau]);
  Vec out(max_lag + 1, 1.0);
  for (size_t tau = 1; tau <= max_lag; ++tau) {
    double mean = 0.0;
    for (size_t j = 1; j <= tau; ++j) mean += d[j];
    mean /= static_cast<double>(tau);
    out[tau] = mean > 0.0 ? d[tau] / mean : 1.0;
  }
  return out;
}

std::vector<Pitch> Yin(const Vec& samples, int sample_rate) {
  const size_t window = 1024, hop = 256;
  const double threshold = 0.15, fmin = 60.0, fmax = 500.0;
  const size_t lo = std::max<size_t>(2, static_cast<size_t>(std::ceil(sample_rate / fmax)));
  const size_t hi = std::min<size_t>(window / 2 - 1, static_cast<size_t>(std::floor(sample_rate / fmin)));
  std::vector<Pitch> out;
  for (size_t start = 0; start + window <= samples.size(); start += hop) {
    const double* frame = samples.data() + start;
    const Vec d = Cmnd(frame, window);
    std::vector<size_t> dips;
    for (size_t tau = lo; tau <= hi; ++tau)
      if (d[tau] < threshold && d[tau] <= d[tau - 1] && d[tau] <= d[tau + 1]) dips.push_back(tau);
    size_t best;
    if (!dips.empty()) {
      best = *std::min_element(dips.begin(), dips.end());
    } else {
      best = lo;
      for (size_t tau = lo; tau <= hi; ++tau)
        if (d[tau] < d[best]) best = tau;
    }
    const double a = d[best - 1], b = d[best], c = d[best + 1];
    double shift = 0.0;
    if (a + c - 2.0 * b > 0.0) shift = std::clamp((a - c) / (2.0 * (a + c - 2.0 * b)), -0.5, 0.5);
    double power = 0.0;
    for (size_t j = 0; j < window; ++j) power += frame[j] * frame[j];
    Pitch p;
    p.cmnd = std::max(0.0, b);
    p.voiced = b <= 0.5 && std::sqrt(power / window) >= 1e-4;
    p.f0 = p.voiced ? std::clamp(sample_rate / (best + shift), fmin, fmax) : 0.0;
    out.push_back(p);
  }
  return out;
}

Mat Weights::Matrix(const std::string& name) const {
  const std::vector<size_t>& s = shapes.at(name);
  const Vec& v = values.at(name);
  Mat m(s[0], Vec(s[1]));
  for (size_t i = 0; i < s[0]; ++i)
    for (size_t j = 0; j < s[1]; ++j) m[i][j] = v[i * s[1] + j];
  return m;
}

Vec Weights::Vector(const std::string& name) const { return values.at(name); }

Kernel Weights::Conv(const std::string& name) const {
  const std::vector<size_t>& s = shapes.at(name);
  const Vec& v = values.at(name);
  Kernel k(s[0], Mat(s[1], Vec(s[2])));
  for (size_t o = 0; o < s[0]; ++o)
    for (size_t i = 0; i < s[1]; ++i)
      for (size_t j = 0; j < s[2]; ++j) k[o][i][j] = v[(o * s[1] + i) * s[2] + j];
  return k;
}

Projection Weights::Proj(const std::string& prefix) const {
  return {Matrix(prefix + ".weight"), Vector(prefix + ".bias")};
}

BackboneStates Backbone(const Mat& mel, const Weights& w, const PipelineConfig& c) {
  Mat x = Relu(Conv1d(mel, w.Conv("backbone.input.weight"), w.Vector("backbone.input.bias"), 1));
  Mat stacked(mel.size());
  for (size_t i = 0; i < c.dilations.size(); ++i) {
    const std::string p = "backbone.block" + std::to_string(i + 1);
    Res2Weights r;
    r.conv_in = w.Conv(p + ".conv_in.weight");
    r.conv_in_b = w.Vector(p + ".conv_in.bias");
    for (int g = 2; g <= c.res2_scale; ++g) {
      r.group.push_back(w.Conv(p + ".res2.conv" + std::to_string(g) + ".weight"));
      r.group_b.push_back(w.Vector(p + ".res2.conv" + std::to_string(g) + ".bias"));
    }
    r.conv_out = w.Conv(p + ".conv_out.weight");
    r.conv_out_b = w.Vector(p + ".conv_out.bias");
    r.se1 = w.Proj(p + ".se.fc1");
    r.se2 = w.Proj(p + ".se.fc2");
    x = Res2(x, c.dilations[i], c.res2_scale, r);
    for (size_t t = 0; t < x.size(); ++t) stacked[t].insert(stacked[t].end(), x[t].begin(), x[t].end());
  }
  const Mat frames = Conv1d(stacked, w.Conv("backbone.mfa.weight"), w.Vector("backbone.mfa.bias"), 1);
  BackboneStates out;
  const Projection fp = w.Proj("backbone.frame_proj");
  out.frames = Affine(frames, fp.w, fp.b);
  const Vec stats = StatsPool(frames, w.Proj("backbone.pool.fc1"), w.Proj("backbone.pool.fc2"));
  const Projection pp = w.Proj("backbone.pool_proj");
  out.pooled = Affine(Mat{stats}, pp.w, pp.b)[0];
  return out;
}

Mat EncodeF0(const std::vector<Pitch>& pitch, const Weights& w) {
  Mat feats;
  for (const Pitch& p : pitch)
    feats.push_back(p.voiced ? Vec{std::log(p.f0 / 100.0), 1.0} : Vec{0.0, 0.0});
  const Projection a = w.Proj("agg.f0_enc.fc1"), b = w.Proj("agg.f0_enc.fc2");
  return Affine(Relu(Affine(feats, a.w, a.b)), b.w, b.b);
}

Mat EncodeMel(const Mat& mel, const Weights& w) {
  const Projection a = w.Proj("agg.mel_enc.fc1"), b = w.Proj("agg.mel_enc.fc2");
  const Mat h = Relu(Affine(Relu(Affine(mel, a.w, a.b)), b.w, b.b));
  return Glu(h, w.Conv("agg.mel_enc.glu.weight"), w.Vector("agg.mel_enc.glu.bias"));
}

Vec Embed(const Vec& samples, const Weights& w, const PipelineConfig& c) {
  const Mat mel = LogMel(samples);
  const BackboneStates sv = Backbone(mel, w, c);
  if (c.mode == "se") return sv.pooled;

  Mat f0, me;
  if (c.mode != "se+me") f0 = EncodeF0(Yin(samples, 22050), w);
  if (c.mode != "se+f0") me = EncodeMel(mel, w);

  Mat h;
  if (c.mode == "se+f0") {
    h = CrossAttention(sv.frames, f0, w, "agg.level1", c.linear_scale);
  } else if (c.mode == "se+me") {
    h = CrossAttention(sv.frames, me, w, "agg.level1", c.linear_scale);
  } else if (c.mode == "se+f0+me") {
    h = CrossAttention(me, CrossAttention(sv.frames, f0, w, "agg.level1", c.linear_scale), w,
                       "agg.level2", c.linear_scale);
  } else if (c.mode == "se+me+f0") {
    h = CrossAttention(f0, CrossAttention(sv.frames, me, w, "agg.level1", c.linear_scale), w,
                       "agg.level2", c.linear_scale);
  } else {
    throw std::invalid_argument("oracle: unknown mode " + c.mode);
  }

  const Vec pooled = TimeMean(h);
  if (!c.splitting) return pooled;
  const Mat tokens = w.Matrix("agg.tokens");
  return MultiHeadAttention(Mat{pooled}, tokens, tokens, c.heads, w.Proj("agg.fuse.q"),
                            w.Proj("agg.fuse.k"), w.Proj("agg.fuse.v"), w.Proj("agg.fuse.o"))
      .output[0];
}

}  // namespace oracle
