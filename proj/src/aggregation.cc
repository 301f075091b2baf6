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

#include "aggregation.h"

#include <algorithm>
#include <cmath>

#include "error.h"

namespace agv {
namespace {

constexpr double kF0Reference = 100.0;

Tensor Truncate(const Tensor& t, size_t rows) {
  return t.rows() == rows ? t : SliceRows(t, 0, rows);
}

// The two sequences an attention-based mode works on: the level-1 prompt
// and, for two-level modes, the level-2 query.
struct Cues {
  const Tensor* prompt = nullptr;
  const Tensor* second = nullptr;
};

Cues SelectCues(const AggregationFeatures& f, AggregationMode mode) {
  switch (mode) {
    case AggregationMode::kSe: return {};
    case AggregationMode::kSeF0: return {&f.f0_states, nullptr};
    case AggregationMode::kSeMe: return {&f.mel_states, nullptr};
    case AggregationMode::kSeF0ThenMe: return {&f.f0_states, &f.mel_states};
    case AggregationMode::kSeMeThenF0: return {&f.mel_states, &f.f0_states};
  }
  throw Error(ErrorCode::kInternal, "unhandled aggregation mode");
}

void Store(std::map<std::string, Tensor>* grads, const std::string& prefix,
           const AffineGrads& g) {
  (*grads)[prefix + ".weight"] = g.dweight;
  Tensor bias({g.dbias.size()}, g.dbias.values());
  (*grads)[prefix + ".bias"] = std::move(bias);
}

}  // namespace

CrossAttentionParams CrossAttentionParams::FromStore(const ParamStore& store,
                                                     const std::string& prefix) {
  return {store.Affine(prefix + ".q"), store.Affine(prefix + ".k"),
          store.Affine(prefix + ".v")};
}

Tensor F0Features(const F0Contour& contour) {
  if (contour.frames.empty()) throw Error(ErrorCode::kEmptyContour, "no F0 frames");
  Tensor feats = Tensor::Matrix(contour.frames.size(), 2);
  for (size_t t = 0; t < contour.frames.size(); ++t) {
    const F0Frame& f = contour.frames[t];
    if (f.voiced && f.f0_hz > 0.0) {
      feats(t, 0) = std::log(f.f0_hz / kF0Reference);
      feats(t, 1) = 1.0;
    }
  }
  return feats;
}

Tensor EncodeF0(const F0Contour& contour, const ParamStore& params) {
  Tensor h = Affine(F0Features(contour), params.Affine("agg.f0_enc.fc1"));
  ReluInPlace(&h);
  return Affine(h, params.Affine("agg.f0_enc.fc2"));
}

Tensor EncodeMel(const MelSpectrogram& mel, const ParamStore& params) {
  Tensor h = Affine(mel.frames, params.Affine("agg.mel_enc.fc1"));
  ReluInPlace(&h);
  h = Affine(h, params.Affine("agg.mel_enc.fc2"));
  ReluInPlace(&h);
  return GluGatedConv(h, params.Get("agg.mel_enc.glu.weight"),
                      params.Get("agg.mel_enc.glu.bias"));
}

CrossAttentionResult CrossAttention(const Tensor& query_states, const Tensor& kv_states,
                                    const CrossAttentionParams& params, ScaleMode mode) {
  CrossAttentionResult r;
  r.q = Affine(query_states, params.q);
  r.k = Affine(kv_states, params.k);
  r.v = Affine(kv_states, params.v);
  r.trace = ScaledDotAttention(r.q, r.k, r.v, mode);
  r.output = r.trace.output;
  return r;
}

Tensor Level1Attention(const Tensor& backbone_states, const Tensor& prompt_states,
                       const ParamStore& params, ScaleMode mode) {
  return CrossAttention(backbone_states, prompt_states,
                        CrossAttentionParams::FromStore(params, "agg.level1"), mode)
      .output;
}

Tensor Level2Attention(const Tensor& query_states, const Tensor& level1_states,
                       const ParamStore& params, ScaleMode mode) {
  return CrossAttention(query_states, level1_states,
                        CrossAttentionParams::FromStore(params, "agg.level2"), mode)
      .output;
}

MultiHeadParams FusionParams(const ParamStore& store) {
  return {store.Affine("agg.fuse.q"), store.Affine("agg.fuse.k"),
          store.Affine("agg.fuse.v"), store.Affine("agg.fuse.o")};
}

Tensor SplitAndFuse(const Tensor& states, const Tensor& tokens, size_t heads,
                    const MultiHeadParams& params, MultiHeadResult* trace) {
  RequireMatrix(tokens, "token bank", states.cols());
  if (tokens.rows() == 0) throw Error(ErrorCode::kShapeMismatch, "empty token bank");
  MultiHeadResult r = MultiHeadAttention(RowMean(states), tokens, tokens, heads, params);
  Tensor out = Tensor::Vector(r.output.values());
  if (trace) *trace = std::move(r);
  return out;
}

AggregationFeatures ComputeFeatures(const AudioBuffer& buf, const ParamStore& params,
                                    const ModelConfig& config) {
  if (buf.sample_rate_hz != kCanonicalSampleRate)
    throw Error(ErrorCode::kRateOutOfRange,
                "expected canonical " + std::to_string(kCanonicalSampleRate) +
                    " Hz audio, got " + std::to_string(buf.sample_rate_hz));
  const MelSpectrogram mel = ComputeMelSpectrogram(buf);
  AggregationFeatures f;
  f.backbone = BackboneForward(mel, params, config.backbone);
  size_t frames = f.backbone.frame_states.rows();
  if (config.uses_f0()) {
    f.f0_states = EncodeF0(YinF0(buf), params);
    frames = std::min(frames, f.f0_states.rows());
  }
  if (config.uses_mel_encoder()) {
    f.mel_states = EncodeMel(mel, params);
    frames = std::min(frames, f.mel_states.rows());
  }
  // Identical framing makes these no-ops; the truncation only guards the
  // attention stages against a future framing change.
  f.backbone.frame_states = Truncate(f.backbone.frame_states, frames);
  if (!f.f0_states.empty()) f.f0_states = Truncate(f.f0_states, frames);
  if (!f.mel_states.empty()) f.mel_states = Truncate(f.mel_states, frames);
  return f;
}

SpeakerEmbedding Aggregate(const AggregationFeatures& features, const ParamStore& params,
                           const ModelConfig& config, AggregationTrace* trace) {
  const AggregationConfig& ac = config.aggregation;
  SpeakerEmbedding emb;
  emb.mode = ac.mode;
  emb.config_hash = config.Hash();
  if (ac.mode == AggregationMode::kSe) {
    emb.vector = features.backbone.pooled;
    return emb;
  }

  const Cues cues = SelectCues(features, ac.mode);
  if (cues.prompt->empty() || (cues.second && cues.second->empty()))
    throw Error(ErrorCode::kShapeMismatch, "features missing a cue required by the mode");

  CrossAttentionResult level1 =
      CrossAttention(features.backbone.frame_states, *cues.prompt,
                     CrossAttentionParams::FromStore(params, "agg.level1"), ac.scale_mode);
  Tensor aggregated = level1.output;
  std::optional<CrossAttentionResult> level2;
  if (cues.second) {
    level2 = CrossAttention(*cues.second, level1.output,
                            CrossAttentionParams::FromStore(params, "agg.level2"),
                            ac.scale_mode);
    aggregated = level2->output;
  }

  std::optional<MultiHeadResult> fusion;
  if (ac.splitting) {
    MultiHeadResult mh;
    emb.vector = SplitAndFuse(aggregated, params.Get("agg.tokens"),
                              static_cast<size_t>(ac.heads), FusionParams(params), &mh);
    fusion = std::move(mh);
  } else {
    emb.vector = Tensor::Vector(RowMean(aggregated).values());
  }

  if (trace) {
    trace->level1 = std::move(level1);
    trace->level2 = std::move(level2);
    trace->aggregated = std::move(aggregated);
    trace->fusion = std::move(fusion);
  }
  return emb;
}

SpeakerEmbedding ExtractEmbedding(const AudioBuffer& buf, const ParamStore& params,
                                  const ModelConfig& config) {
  ValidateParams(params, config);
  return Aggregate(ComputeFeatures(buf, params, config), params, config);
}

std::vector<std::string> AttentionParamNames(const ModelConfig& config) {
  std::vector<std::string> names;
  const std::vector<ParamSpec> specs = RequiredParams(config);
  for (const ParamSpec& s : specs) {
    if (s.name.rfind("agg.level", 0) == 0 || s.name.rfind("agg.fuse", 0) == 0 ||
        s.name == "agg.tokens")
      names.push_back(s.name);
  }
  return names;
}

std::map<std::string, Tensor> AttentionGradients(const AggregationFeatures& features,
                                                 const ParamStore& params,
                                                 const ModelConfig& config) {
  std::map<std::string, Tensor> grads;
  const AggregationConfig& ac = config.aggregation;
  if (ac.mode == AggregationMode::kSe) return grads;

  AggregationTrace trace;
  const SpeakerEmbedding emb = Aggregate(features, params, config, &trace);
  const size_t d = emb.vector.size();
  const Tensor& aggregated = trace.aggregated;
  const double frames = static_cast<double>(aggregated.rows());

  // d sum(embedding) / d aggregated rows: the pooled query (or plain mean)
  // spreads its gradient evenly over time.
  Tensor d_pooled = Tensor::Matrix(1, d, 1.0);
  if (ac.splitting) {
    const Tensor& tokens = params.Get("agg.tokens");
    const MultiHeadParams mh = FusionParams(params);
    const Tensor query = RowMean(aggregated);
    MultiHeadGrads g =
        MultiHeadAttentionBackward(*trace.fusion, query, tokens, tokens, mh, d_pooled);
    Store(&grads, "agg.fuse.q", g.q);
    Store(&grads, "agg.fuse.k", g.k);
    Store(&grads, "agg.fuse.v", g.v);
    Store(&grads, "agg.fuse.o", g.o);
    Tensor d_tokens = g.dkeys;
    AddInPlace(&d_tokens, g.dvalues);
    grads["agg.tokens"] = std::move(d_tokens);
    d_pooled = g.dquery;
  }
  Tensor d_aggregated = Tensor::Matrix(aggregated.rows(), d);
  for (size_t t = 0; t < aggregated.rows(); ++t)
    for (size_t j = 0; j < d; ++j) d_aggregated(t, j) = d_pooled(0, j) / frames;

  const Cues cues = SelectCues(features, ac.mode);
  Tensor d_level1 = d_aggregated;
  if (trace.level2) {
    const CrossAttentionResult& l2 = *trace.level2;
    const CrossAttentionParams p = CrossAttentionParams::FromStore(params, "agg.level2");
    AttentionGrads ag = AttentionBackward(l2.trace, l2.q, l2.k, l2.v, d_aggregated);
    const Tensor& level1_out = trace.level1->output;
    Store(&grads, "agg.level2.q", AffineBackward(*cues.second, p.q.weight, ag.dq));
    AffineGrads gk = AffineBackward(level1_out, p.k.weight, ag.dk);
    AffineGrads gv = AffineBackward(level1_out, p.v.weight, ag.dv);
    d_level1 = gk.dx;
    AddInPlace(&d_level1, gv.dx);
    Store(&grads, "agg.level2.k", gk);
    Store(&grads, "agg.level2.v", gv);
  }

  const CrossAttentionResult& l1 = *trace.level1;
  const CrossAttentionParams p = CrossAttentionParams::FromStore(params, "agg.level1");
  AttentionGrads ag = AttentionBackward(l1.trace, l1.q, l1.k, l1.v, d_level1);
  Store(&grads, "agg.level1.q",
        AffineBackward(features.backbone.frame_states, p.q.weight, ag.dq));
  Store(&grads, "agg.level1.k", AffineBackward(*cues.prompt, p.k.weight, ag.dk));
  Store(&grads, "agg.level1.v", AffineBackward(*cues.prompt, p.v.weight, ag.dv));
  return grads;
}

}  // namespace agv
