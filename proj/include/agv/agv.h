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

/* C interface to the speaker embedding library. Every object is an opaque
 * handle released with its matching *_free function. Calls return an
 * agv_status; on failure agv_last_error() describes the most recent error
 * on the calling thread. */

#ifndef AGV_AGV_H_
#define AGV_AGV_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(AGV_BUILDING_LIBRARY)
#define AGV_API __declspec(dllexport)
#else
#define AGV_API __declspec(dllimport)
#endif
#else
#define AGV_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

#define AGV_ABI_VERSION 1u

typedef enum agv_status {
  AGV_OK = 0,
  AGV_ERR_MALFORMED_CONTAINER = 1,
  AGV_ERR_UNSUPPORTED_ENCODING = 2,
  AGV_ERR_EMPTY_AUDIO = 3,
  AGV_ERR_RATE_OUT_OF_RANGE = 4,
  AGV_ERR_TOO_SHORT = 5,
  AGV_ERR_DEGENERATE_BAND = 6,
  AGV_ERR_SHAPE_MISMATCH = 7,
  AGV_ERR_EVEN_KERNEL = 8,
  AGV_ERR_INDIVISIBLE_HEADS = 9,
  AGV_ERR_INDIVISIBLE_SCALE = 10,
  AGV_ERR_NON_FINITE_EVALUATION = 11,
  AGV_ERR_EMPTY_CONTOUR = 12,
  AGV_ERR_MISSING_PARAMETER = 13,
  AGV_ERR_UNEXPECTED_PARAMETER = 14,
  AGV_ERR_INVALID_CONFIG = 15,
  AGV_ERR_BAD_MAGIC = 16,
  AGV_ERR_HEADER_MISMATCH = 17,
  AGV_ERR_TRUNCATED_PAYLOAD = 18,
  AGV_ERR_ZERO_NORM = 19,
  AGV_ERR_DIM_MISMATCH = 20,
  AGV_ERR_LABEL_MISMATCH = 21,
  AGV_ERR_IO = 22,
  AGV_ERR_INVALID_ARGUMENT = 23,
  AGV_ERR_INTERNAL = 24,
  /* Self-test ran to completion but at least one check failed. */
  AGV_ERR_CHECK_FAILED = 25
} agv_status;

typedef enum agv_mode {
  AGV_MODE_SE = 0,
  AGV_MODE_SE_F0 = 1,
  AGV_MODE_SE_ME = 2,
  AGV_MODE_SE_F0_ME = 3, /* F0 prompting, then mel states query */
  AGV_MODE_SE_ME_F0 = 4
} agv_mode;

typedef enum agv_scale_mode { AGV_SCALE_SQRT = 0, AGV_SCALE_LINEAR = 1 } agv_scale_mode;

typedef struct agv_model_config {
  agv_mode mode;
  int splitting;
  int n_tokens;
  int heads;
  int d_model;
  int channels;
  agv_scale_mode scale_mode;
} agv_model_config;

#define AGV_MAX_RANK 4

typedef struct agv_tensor_info {
  const char* name; /* valid while the model lives */
  size_t rank;
  size_t shape[AGV_MAX_RANK];
  double min, max, mean;
} agv_tensor_info;

typedef struct agv_audio agv_audio;
typedef struct agv_matrix agv_matrix;
typedef struct agv_model agv_model;
typedef struct agv_embedding agv_embedding;

AGV_API uint32_t agv_abi_version(void);
AGV_API const char* agv_status_name(agv_status status);
AGV_API const char* agv_last_error(void);
AGV_API void agv_string_free(char* text);

/* Modes: "se", "se+f0", "se+me", "se+f0+me", "se+me+f0". */
AGV_API agv_status agv_mode_parse(const char* name, agv_mode* out);
AGV_API const char* agv_mode_name(agv_mode mode);
AGV_API void agv_model_config_default(agv_model_config* out);

/* Audio */
AGV_API agv_status agv_audio_read_wav(const char* path, agv_audio** out);
AGV_API agv_status agv_audio_from_samples(const double* samples, size_t n, int sample_rate,
                                          agv_audio** out);
/* Resample to 22050 Hz; optionally peak-normalize to 0.95. */
AGV_API agv_status agv_audio_canonicalize(const agv_audio* in, int peak_normalize,
                                          agv_audio** out);
AGV_API agv_status agv_audio_write_wav(const agv_audio* audio, const char* path);
AGV_API size_t agv_audio_length(const agv_audio* audio);
AGV_API int agv_audio_sample_rate(const agv_audio* audio);
AGV_API const double* agv_audio_samples(const agv_audio* audio);
AGV_API void agv_audio_free(agv_audio* audio);

/* Front-end, on canonical audio. Mel is [T x 80]; F0 is [T x 3] with
 * columns f0_hz, voiced (0/1), cmnd_min. */
AGV_API agv_status agv_mel_spectrogram(const agv_audio* audio, agv_matrix** out);
AGV_API agv_status agv_f0_contour(const agv_audio* audio, agv_matrix** out);

AGV_API size_t agv_matrix_rows(const agv_matrix* m);
AGV_API size_t agv_matrix_cols(const agv_matrix* m);
AGV_API const double* agv_matrix_data(const agv_matrix* m);
AGV_API void agv_matrix_free(agv_matrix* m);

/* Weights */
AGV_API agv_status agv_model_init(const agv_model_config* config, uint64_t seed,
                                  agv_model** out);
AGV_API agv_status agv_model_load(const char* path, agv_model** out);
AGV_API agv_status agv_model_save(const agv_model* model, const char* path);
AGV_API void agv_model_get_config(const agv_model* model, agv_model_config* out);
AGV_API uint64_t agv_model_seed(const agv_model* model);
AGV_API uint64_t agv_model_config_hash(const agv_model* model);
/* AGV_ERR_INVALID_CONFIG when the config differs from the model's own. */
AGV_API agv_status agv_model_check_config(const agv_model* model,
                                          const agv_model_config* config);
AGV_API size_t agv_model_tensor_count(const agv_model* model);
AGV_API agv_status agv_model_tensor_info(const agv_model* model, size_t index,
                                         agv_tensor_info* out);
AGV_API void agv_model_free(agv_model* model);

/* Embeddings. agv_embed canonicalizes the audio first when needed. */
AGV_API agv_status agv_embed(const agv_model* model, const agv_audio* audio,
                             agv_embedding** out);
/* Weight-free control: temporal mean and std of the log-mel bands. */
AGV_API agv_status agv_mel_stats_embedding(const agv_audio* audio, agv_embedding** out);
AGV_API agv_status agv_embedding_create(const double* values, size_t dim,
                                        agv_embedding** out);
AGV_API agv_status agv_embedding_mean(const agv_embedding* const* items, size_t n,
                                      agv_embedding** out);
AGV_API size_t agv_embedding_dim(const agv_embedding* e);
AGV_API const double* agv_embedding_values(const agv_embedding* e);
AGV_API const char* agv_embedding_mode(const agv_embedding* e);
AGV_API uint64_t agv_embedding_config_hash(const agv_embedding* e);
/* JSON when binary == 0, otherwise "AGVE0001" binary. Load sniffs. */
AGV_API agv_status agv_embedding_save(const agv_embedding* e, const char* path, int binary);
AGV_API agv_status agv_embedding_load(const char* path, agv_embedding** out);
AGV_API void agv_embedding_free(agv_embedding* e);

/* Evaluation */
AGV_API agv_status agv_cosine(const agv_embedding* a, const agv_embedding* b, double* out);
AGV_API agv_status agv_cross_similarity(const agv_embedding* const* rows, size_t n_rows,
                                        const agv_embedding* const* cols, size_t n_cols,
                                        agv_matrix** out);
/* Labels are speaker (or group) ids per row/column. When ids are given,
 * entries whose row and column ids match are skipped. */
AGV_API agv_status agv_diagonal_dominance(const agv_matrix* m, const char* const* row_labels,
                                          const char* const* col_labels,
                                          const char* const* row_ids,
                                          const char* const* col_ids, double* out);
AGV_API agv_status agv_abx_select(const agv_embedding* reference,
                                  const agv_embedding* const* candidates, size_t n,
                                  size_t* out_index);
AGV_API agv_status agv_write_similarity_csv(const agv_matrix* m, const char* const* row_ids,
                                            const char* const* col_ids, const char* path);
AGV_API agv_status agv_write_similarity_pgm(const agv_matrix* m, const char* path);

/* Harmonic voice-like test tone at 22050 Hz; harmonics of f0_hz fall by
 * tilt_db_per_octave. Fully determined by the arguments. */
AGV_API agv_status agv_synth_voice(double f0_hz, double tilt_db_per_octave, double seconds,
                                   uint64_t seed, agv_audio** out);

/* Self-test. weights_path may be NULL. *report receives a text report to be
 * released with agv_string_free (also on AGV_ERR_CHECK_FAILED). */
AGV_API agv_status agv_selftest(const char* weights_path, const char* const* audio_paths,
                                size_t n_audio, char** report);

#ifdef __cplusplus
}
#endif

#endif /* AGV_AGV_H_ */
