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

#ifndef AGV_EVALUATION_H_
#define AGV_EVALUATION_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dsp_frontend.h"
#include "tensor.h"

namespace agv {

// Cosine similarities with ids (utterances or groups) and labels (speaker or
// language) for both axes.
struct SimilarityMatrix {
  Tensor values;  // [n x m], entries in [-1, 1]
  std::vector<std::string> row_ids, col_ids;
  std::vector<std::string> row_labels, col_labels;
};

// Throws DimMismatch or ZeroNorm. Clamped to [-1, 1].
double Cosine(std::span<const double> a, std::span<const double> b);

// Entry (i, j) = Cosine(rows[i], cols[j]). Ids and labels may be empty, in
// which case positional ids are generated.
SimilarityMatrix CrossSimilarity(const std::vector<Tensor>& rows,
                                 const std::vector<Tensor>& cols,
                                 std::vector<std::string> row_labels = {},
                                 std::vector<std::string> col_labels = {},
                                 std::vector<std::string> row_ids = {},
                                 std::vector<std::string> col_ids = {});

// Fraction of rows whose best column (lowest index on ties) carries the row's
// label. Throws LabelMismatch if a row label never occurs among the columns.
double DiagonalDominance(const SimilarityMatrix& m);

// As above, ignoring entries whose row and column ids are equal, which is
// what an utterance-level matrix of a set against itself needs.
double DiagonalDominanceExcludingSelf(const SimilarityMatrix& m);

// Index of the candidate most similar to the reference; ties go to the
// lowest index. Needs at least two candidates.
size_t AbxSelect(std::span<const double> reference, const std::vector<Tensor>& candidates);

// Mean embeddings per group, split into two disjoint halves: the first
// ceil(n/2) members of each group go to `rows`, the rest to `cols` (a
// single-member group is used on both sides). Groups appear in order of
// first occurrence.
struct GroupSplit {
  std::vector<std::string> groups;
  std::vector<Tensor> rows;
  std::vector<Tensor> cols;
};
GroupSplit SplitGroupMeans(const std::vector<Tensor>& embeddings,
                           const std::vector<std::string>& groups);

// Weight-free control embedding: per-band temporal mean then std of the
// log-mel frames, [2 * n_mels].
Tensor MelStatsEmbedding(const MelSpectrogram& mel);

// Header row of column ids, then one row per row id; %.9g entries.
std::string SimilarityCsv(const SimilarityMatrix& m);
// Binary P5 greymap, [-1, 1] mapped affinely onto [0, 255].
std::vector<uint8_t> SimilarityPgm(const Tensor& values);

}  // namespace agv

#endif  // AGV_EVALUATION_H_
