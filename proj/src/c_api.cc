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

#include "agv/agv.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <memory>
#include <string>
#include <vector>

#include "aggregation.h"
#include "audio_io.h"
#include "dsp_frontend.h"
#include "embedding_io.h"
#include "error.h"
#include "evaluation.h"
#include "file_util.h"
#include "selftest.h"
#include "synth.h"
#include "weights_io.h"

struct agv_audio {
  agv::AudioBuffer buf;
};

struct agv_matrix {
  agv::Tensor values;
};

struct agv_model {
  agv::ParamStore store;
};

struct agv_embedding {
  agv::SpeakerEmbedding e;
  std::string mode_name;
};

static_assert(static_cast<int>(agv::ErrorCode::kInternal) == AGV_ERR_INTERNAL,
              "error code tables out of sync");

namespace {

thread_local std::string g_last_error;

template <typename F>
agv_status Guard(F&& body) {
  try {
    body();
    g_last_error.clear();
    return AGV_OK;
  } catch (const agv::Error& e) {
    g_last_error = e.what();
    return static_cast<agv_status>(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return AGV_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return AGV_ERR_INTERNAL;
  }
}

void RequireOut(const void* p, const char* what) {
  if (!p) throw agv::Error(agv::ErrorCode::kInvalidArgument, std::string(what) + " is null");
}

agv::ModelConfig FromC(const agv_model_config& c) {
  agv::ModelConfig m;
  m.aggregation.mode = static_cast<agv::AggregationMode>(c.mode);
  if (c.mode < AGV_MODE_SE || c.mode > AGV_MODE_SE_ME_F0)
    throw agv::Error(agv::ErrorCode::kInvalidConfig, "unknown mode value");
  m.aggregation.splitting = c.splitting != 0;
  m.aggregation.n_tokens = c.n_tokens;
  m.aggregation.heads = c.heads;
  m.aggregation.scale_mode =
      c.scale_mode == AGV_SCALE_LINEAR ? agv::ScaleMode::kLinear : agv::ScaleMode::kSqrt;
  m.backbone.channels = c.channels;
  m.backbone.d_model = c.d_model;
  return m;
}

agv_model_config ToC(const agv::ModelConfig& m) {
  agv_model_config c;
  c.mode = static_cast<agv_mode>(m.aggregation.mode);
  c.splitting = m.aggregation.splitting ? 1 : 0;
  c.n_tokens = m.aggregation.n_tokens;
  c.heads = m.aggregation.heads;
  c.scale_mode = m.aggregation.scale_mode == agv::ScaleMode::kLinear ? AGV_SCALE_LINEAR
                                                                     : AGV_SCALE_SQRT;
  c.channels = m.backbone.channels;
  c.d_model = m.backbone.d_model;
  return c;
}

agv_embedding* Wrap(agv::SpeakerEmbedding e) {
  auto* out = new agv_embedding{std::move(e), {}};
  out->mode_name = std::string(agv::ModeName(out->e.mode));
  return out;
}

std::vector<agv::Tensor> Vectors(const agv_embedding* const* items, size_t n) {
  if (n && !items) throw agv::Error(agv::ErrorCode::kInvalidArgument, "null embedding list");
  std::vector<agv::Tensor> out;
  for (size_t i = 0; i < n; ++i) {
    RequireOut(items[i], "embedding");
    out.push_back(items[i]->e.vector);
  }
  return out;
}

std::vector<std::string> Strings(const char* const* items, size_t n) {
  std::vector<std::string> out;
  if (!items) return out;
  for (size_t i = 0; i < n; ++i) out.emplace_back(items[i] ? items[i] : "");
  return out;
}

char* CopyString(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

uint32_t agv_abi_version(void) { return AGV_ABI_VERSION; }

const char* agv_status_name(agv_status status) {
  if (status == AGV_OK) return "OK";
  if (status == AGV_ERR_CHECK_FAILED) return "CheckFailed";
  return agv::ErrorCodeName(static_cast<agv::ErrorCode>(status));
}

const char* agv_last_error(void) { return g_last_error.c_str(); }

void agv_string_free(char* text) { std::free(text); }

agv_status agv_mode_parse(const char* name, agv_mode* out) {
  return Guard([&] {
    RequireOut(name, "name");
    RequireOut(out, "out");
    *out = static_cast<agv_mode>(agv::ParseMode(name));
  });
}

const char* agv_mode_name(agv_mode mode) {
  if (mode < AGV_MODE_SE || mode > AGV_MODE_SE_ME_F0) return "?";
  return agv::ModeName(static_cast<agv::AggregationMode>(mode)).data();
}

void agv_model_config_default(agv_model_config* out) {
  if (out) *out = ToC(agv::ModelConfig{});
}

agv_status agv_audio_read_wav(const char* path, agv_audio** out) {
  return Guard([&] {
    RequireOut(path, "path");
    RequireOut(out, "out");
    *out = new agv_audio{agv::ReadWavFile(path)};
  });
}

agv_status agv_audio_from_samples(const double* samples, size_t n, int sample_rate,
                                  agv_audio** out) {
  return Guard([&] {
    RequireOut(out, "out");
    if (n && !samples) throw agv::Error(agv::ErrorCode::kInvalidArgument, "null samples");
    if (sample_rate <= 0) throw agv::Error(agv::ErrorCode::kRateOutOfRange, "non-positive rate");
    agv::AudioBuffer buf;
    buf.sample_rate_hz = sample_rate;
    buf.samples.assign(samples, samples + n);
    *out = new agv_audio{std::move(buf)};
  });
}

agv_status agv_audio_canonicalize(const agv_audio* in, int peak_normalize, agv_audio** out) {
  return Guard([&] {
    RequireOut(in, "audio");
    RequireOut(out, "out");
    *out = new agv_audio{agv::Canonicalize(in->buf, peak_normalize != 0)};
  });
}

agv_status agv_audio_write_wav(const agv_audio* audio, const char* path) {
  return Guard([&] {
    RequireOut(audio, "audio");
    RequireOut(path, "path");
    agv::WriteFileAtomic(path, agv::EncodeWavPcm16(audio->buf));
  });
}

size_t agv_audio_length(const agv_audio* audio) { return audio ? audio->buf.samples.size() : 0; }
int agv_audio_sample_rate(const agv_audio* audio) { return audio ? audio->buf.sample_rate_hz : 0; }
const double* agv_audio_samples(const agv_audio* audio) {
  return audio ? audio->buf.samples.data() : nullptr;
}
void agv_audio_free(agv_audio* audio) { delete audio; }

agv_status agv_mel_spectrogram(const agv_audio* audio, agv_matrix** out) {
  return Guard([&] {
    RequireOut(audio, "audio");
    RequireOut(out, "out");
    *out = new agv_matrix{agv::ComputeMelSpectrogram(audio->buf).frames};
  });
}

agv_status agv_f0_contour(const agv_audio* audio, agv_matrix** out) {
  return Guard([&] {
    RequireOut(audio, "audio");
    RequireOut(out, "out");
    const agv::F0Contour c = agv::YinF0(audio->buf);
    agv::Tensor t = agv::Tensor::Matrix(c.frames.size(), 3);
    for (size_t i = 0; i < c.frames.size(); ++i) {
      t(i, 0) = c.frames[i].f0_hz;
      t(i, 1) = c.frames[i].voiced ? 1.0 : 0.0;
      t(i, 2) = c.frames[i].cmnd_min;
    }
    *out = new agv_matrix{std::move(t)};
  });
}

size_t agv_matrix_rows(const agv_matrix* m) { return m ? m->values.rows() : 0; }
size_t agv_matrix_cols(const agv_matrix* m) { return m ? m->values.cols() : 0; }
const double* agv_matrix_data(const agv_matrix* m) { return m ? m->values.data().data() : nullptr; }
void agv_matrix_free(agv_matrix* m) { delete m; }

agv_status agv_model_init(const agv_model_config* config, uint64_t seed, agv_model** out) {
  return Guard([&] {
    RequireOut(config, "config");
    RequireOut(out, "out");
    *out = new agv_model{agv::InitParams(FromC(*config), seed)};
  });
}

agv_status agv_model_load(const char* path, agv_model** out) {
  return Guard([&] {
    RequireOut(path, "path");
    RequireOut(out, "out");
    *out = new agv_model{agv::LoadParams(path)};
  });
}

agv_status agv_model_save(const agv_model* model, const char* path) {
  return Guard([&] {
    RequireOut(model, "model");
    RequireOut(path, "path");
    agv::SaveParams(model->store, path);
  });
}

void agv_model_get_config(const agv_model* model, agv_model_config* out) {
  if (model && out) *out = ToC(model->store.meta().config);
}

uint64_t agv_model_seed(const agv_model* model) { return model ? model->store.meta().seed : 0; }

uint64_t agv_model_config_hash(const agv_model* model) {
  return model ? model->store.meta().config.Hash() : 0;
}

agv_status agv_model_check_config(const agv_model* model, const agv_model_config* config) {
  return Guard([&] {
    RequireOut(model, "model");
    RequireOut(config, "config");
    const agv::ModelConfig wanted = FromC(*config);
    const agv::ModelConfig& have = model->store.meta().config;
    if (wanted.Hash() != have.Hash())
      throw agv::Error(agv::ErrorCode::kInvalidConfig,
                       "requested " + wanted.Canonical() + " but weights hold " +
                           have.Canonical());
    agv::ValidateParams(model->store, wanted);
  });
}

size_t agv_model_tensor_count(const agv_model* model) {
  return model ? model->store.entries().size() : 0;
}

agv_status agv_model_tensor_info(const agv_model* model, size_t index, agv_tensor_info* out) {
  return Guard([&] {
    RequireOut(model, "model");
    RequireOut(out, "out");
    const auto& entries = model->store.entries();
    if (index >= entries.size())
      throw agv::Error(agv::ErrorCode::kInvalidArgument, "tensor index out of range");
    auto it = entries.begin();
    std::advance(it, static_cast<long>(index));
    const agv::Tensor& t = it->second;
    if (t.rank() > AGV_MAX_RANK)
      throw agv::Error(agv::ErrorCode::kShapeMismatch, "tensor rank above AGV_MAX_RANK");
    *out = agv_tensor_info{};
    out->name = it->first.c_str();
    out->rank = t.rank();
    for (size_t i = 0; i < t.rank(); ++i) out->shape[i] = t.dim(i);
    if (!t.empty()) {
      out->min = out->max = t[0];
      double sum = 0.0;
      for (double v : t.data()) {
        out->min = std::min(out->min, v);
        out->max = std::max(out->max, v);
        sum += v;
      }
      out->mean = sum / static_cast<double>(t.size());
    }
  });
}

void agv_model_free(agv_model* model) { delete model; }

agv_status agv_embed(const agv_model* model, const agv_audio* audio, agv_embedding** out) {
  return Guard([&] {
    RequireOut(model, "model");
    RequireOut(audio, "audio");
    RequireOut(out, "out");
    const agv::AudioBuffer canonical = agv::Canonicalize(audio->buf);
    *out = Wrap(agv::ExtractEmbedding(canonical, model->store, model->store.meta().config));
  });
}

agv_status agv_mel_stats_embedding(const agv_audio* audio, agv_embedding** out) {
  return Guard([&] {
    RequireOut(audio, "audio");
    RequireOut(out, "out");
    agv::SpeakerEmbedding e;
    e.vector = agv::MelStatsEmbedding(agv::ComputeMelSpectrogram(agv::Canonicalize(audio->buf)));
    *out = Wrap(std::move(e));
  });
}

agv_status agv_embedding_create(const double* values, size_t dim, agv_embedding** out) {
  return Guard([&] {
    RequireOut(out, "out");
    if (dim == 0 || !values)
      throw agv::Error(agv::ErrorCode::kInvalidArgument, "embedding needs values");
    agv::SpeakerEmbedding e;
    e.vector = agv::Tensor::Vector(std::vector<double>(values, values + dim));
    *out = Wrap(std::move(e));
  });
}

agv_status agv_embedding_mean(const agv_embedding* const* items, size_t n, agv_embedding** out) {
  return Guard([&] {
    RequireOut(out, "out");
    const std::vector<agv::Tensor> v = Vectors(items, n);
    if (v.empty()) throw agv::Error(agv::ErrorCode::kInvalidArgument, "mean of nothing");
    agv::SpeakerEmbedding e = items[0]->e;
    for (size_t i = 1; i < v.size(); ++i) {
      if (v[i].size() != e.vector.size())
        throw agv::Error(agv::ErrorCode::kDimMismatch, "embeddings differ in dimension");
      agv::AddInPlace(&e.vector, v[i]);
    }
    for (double& x : e.vector.data()) x /= static_cast<double>(v.size());
    *out = Wrap(std::move(e));
  });
}

size_t agv_embedding_dim(const agv_embedding* e) { return e ? e->e.vector.size() : 0; }
const double* agv_embedding_values(const agv_embedding* e) {
  return e ? e->e.vector.data().data() : nullptr;
}
const char* agv_embedding_mode(const agv_embedding* e) { return e ? e->mode_name.c_str() : ""; }
uint64_t agv_embedding_config_hash(const agv_embedding* e) { return e ? e->e.config_hash : 0; }

agv_status agv_embedding_save(const agv_embedding* e, const char* path, int binary) {
  return Guard([&] {
    RequireOut(e, "embedding");
    RequireOut(path, "path");
    agv::SaveEmbedding(e->e, path, binary != 0);
  });
}

agv_status agv_embedding_load(const char* path, agv_embedding** out) {
  return Guard([&] {
    RequireOut(path, "path");
    RequireOut(out, "out");
    *out = Wrap(agv::LoadEmbedding(path));
  });
}

void agv_embedding_free(agv_embedding* e) { delete e; }

agv_status agv_cosine(const agv_embedding* a, const agv_embedding* b, double* out) {
  return Guard([&] {
    RequireOut(a, "a");
    RequireOut(b, "b");
    RequireOut(out, "out");
    *out = agv::Cosine(a->e.vector.data(), b->e.vector.data());
  });
}

agv_status agv_cross_similarity(const agv_embedding* const* rows, size_t n_rows,
                                const agv_embedding* const* cols, size_t n_cols,
                                agv_matrix** out) {
  return Guard([&] {
    RequireOut(out, "out");
    *out = new agv_matrix{
        agv::CrossSimilarity(Vectors(rows, n_rows), Vectors(cols, n_cols)).values};
  });
}

agv_status agv_diagonal_dominance(const agv_matrix* m, const char* const* row_labels,
                                  const char* const* col_labels, const char* const* row_ids,
                                  const char* const* col_ids, double* out) {
  return Guard([&] {
    RequireOut(m, "matrix");
    RequireOut(row_labels, "row_labels");
    RequireOut(col_labels, "col_labels");
    RequireOut(out, "out");
    agv::SimilarityMatrix sm;
    sm.values = m->values;
    sm.row_labels = Strings(row_labels, m->values.rows());
    sm.col_labels = Strings(col_labels, m->values.cols());
    if (row_ids && col_ids) {
      sm.row_ids = Strings(row_ids, m->values.rows());
      sm.col_ids = Strings(col_ids, m->values.cols());
      *out = agv::DiagonalDominanceExcludingSelf(sm);
    } else {
      *out = agv::DiagonalDominance(sm);
    }
  });
}

agv_status agv_abx_select(const agv_embedding* reference, const agv_embedding* const* candidates,
                          size_t n, size_t* out_index) {
  return Guard([&] {
    RequireOut(reference, "reference");
    RequireOut(out_index, "out_index");
    *out_index = agv::AbxSelect(reference->e.vector.data(), Vectors(candidates, n));
  });
}

agv_status agv_write_similarity_csv(const agv_matrix* m, const char* const* row_ids,
                                    const char* const* col_ids, const char* path) {
  return Guard([&] {
    RequireOut(m, "matrix");
    RequireOut(path, "path");
    agv::SimilarityMatrix sm;
    sm.values = m->values;
    sm.row_ids = Strings(row_ids, m->values.rows());
    sm.col_ids = Strings(col_ids, m->values.cols());
    for (size_t i = sm.row_ids.size(); i < m->values.rows(); ++i)
      sm.row_ids.push_back("r" + std::to_string(i));
    for (size_t j = sm.col_ids.size(); j < m->values.cols(); ++j)
      sm.col_ids.push_back("c" + std::to_string(j));
    agv::WriteFileAtomic(path, agv::SimilarityCsv(sm));
  });
}

agv_status agv_write_similarity_pgm(const agv_matrix* m, const char* path) {
  return Guard([&] {
    RequireOut(m, "matrix");
    RequireOut(path, "path");
    agv::WriteFileAtomic(path, agv::SimilarityPgm(m->values));
  });
}

agv_status agv_synth_voice(double f0_hz, double tilt_db_per_octave, double seconds,
                           uint64_t seed, agv_audio** out) {
  return Guard([&] {
    RequireOut(out, "out");
    if (!(f0_hz > 0.0) || !(seconds > 0.0))
      throw agv::Error(agv::ErrorCode::kInvalidArgument, "f0 and duration must be positive");
    agv::VoiceSpec spec;
    spec.f0_hz = f0_hz;
    spec.tilt_db_per_octave = tilt_db_per_octave;
    *out = new agv_audio{agv::SynthVoice(spec, seconds, seed)};
  });
}

agv_status agv_selftest(const char* weights_path, const char* const* audio_paths, size_t n_audio,
                        char** report) {
  bool passed = false;
  const agv_status status = Guard([&] {
    RequireOut(report, "report");
    *report = nullptr;
    agv::SelfTestOptions options;
    if (weights_path) options.weights_path = weights_path;
    options.audio_paths = Strings(audio_paths, n_audio);
    const agv::SelfTestReport r = agv::RunSelfTest(options);
    passed = r.passed;
    *report = CopyString(r.text);
  });
  if (status != AGV_OK) return status;
  if (!passed) {
    g_last_error = "self-test checks failed";
    return AGV_ERR_CHECK_FAILED;
  }
  return AGV_OK;
}

}  // extern "C"
