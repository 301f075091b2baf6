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

#include "evaluation.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "error.h"

namespace agv {
namespace {

std::vector<std::string> Positional(const char* prefix, size_t n) {
  std::vector<std::string> out;
  for (size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

double Dominance(const SimilarityMatrix& m, bool skip_self) {
  const size_t n = m.values.rows(), cols = m.values.cols();
  if (m.row_labels.size() != n || m.col_labels.size() != cols)
    throw Error(ErrorCode::kLabelMismatch, "labels do not cover the matrix");
  if (n == 0) throw Error(ErrorCode::kLabelMismatch, "empty matrix");
  const std::set<std::string> col_set(m.col_labels.begin(), m.col_labels.end());
  size_t hits = 0;
  for (size_t i = 0; i < n; ++i) {
    if (!col_set.count(m.row_labels[i]))
      throw Error(ErrorCode::kLabelMismatch,
                  "row label '" + m.row_labels[i] + "' has no column");
    long best = -1;
    for (size_t j = 0; j < cols; ++j) {
      if (skip_self && m.row_ids[i] == m.col_ids[j]) continue;
      if (best < 0 || m.values(i, j) > m.values(i, static_cast<size_t>(best)))
        best = static_cast<long>(j);
    }
    if (best >= 0 && m.col_labels[static_cast<size_t>(best)] == m.row_labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(n);
}

}  // namespace

double Cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw Error(ErrorCode::kDimMismatch,
                std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw Error(ErrorCode::kZeroNorm, "zero-norm embedding");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

SimilarityMatrix CrossSimilarity(const std::vector<Tensor>& rows,
                                 const std::vector<Tensor>& cols,
                                 std::vector<std::string> row_labels,
                                 std::vector<std::string> col_labels,
                                 std::vector<std::string> row_ids,
                                 std::vector<std::string> col_ids) {
  if (rows.empty() || cols.empty())
    throw Error(ErrorCode::kInvalidArgument, "similarity needs non-empty lists");
  SimilarityMatrix m;
  m.values = Tensor::Matrix(rows.size(), cols.size());
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < cols.size(); ++j)
      m.values(i, j) = Cosine(rows[i].data(), cols[j].data());
  m.row_ids = row_ids.empty() ? Positional("r", rows.size()) : std::move(row_ids);
  m.col_ids = col_ids.empty() ? Positional("c", cols.size()) : std::move(col_ids);
  m.row_labels = row_labels.empty() ? m.row_ids : std::move(row_labels);
  m.col_labels = col_labels.empty() ? m.col_ids : std::move(col_labels);
  if (m.row_ids.size() != rows.size() || m.col_ids.size() != cols.size() ||
      m.row_labels.size() != rows.size() || m.col_labels.size() != cols.size())
    throw Error(ErrorCode::kLabelMismatch, "label count differs from embedding count");
  return m;
}

double DiagonalDominance(const SimilarityMatrix& m) { return Dominance(m, false); }

double DiagonalDominanceExcludingSelf(const SimilarityMatrix& m) {
  return Dominance(m, true);
}

size_t AbxSelect(std::span<const double> reference, const std::vector<Tensor>& candidates) {
  if (candidates.size() < 2)
    throw Error(ErrorCode::kInvalidArgument, "ABX needs at least two candidates");
  size_t best = 0;
  double best_sim = Cosine(reference, candidates[0].data());
  for (size_t i = 1; i < candidates.size(); ++i) {
    const double sim = Cosine(reference, candidates[i].data());
    if (sim > best_sim) {
      best_sim = sim;
      best = i;
    }
  }
  return best;
}

GroupSplit SplitGroupMeans(const std::vector<Tensor>& embeddings,
                           const std::vector<std::string>& groups) {
  if (embeddings.size() != groups.size() || embeddings.empty())
    throw Error(ErrorCode::kLabelMismatch, "one group per embedding required");
  GroupSplit out;
  std::map<std::string, std::vector<size_t>> members;
  for (size_t i = 0; i < groups.size(); ++i) {
    if (!members.count(groups[i])) out.groups.push_back(groups[i]);
    members[groups[i]].push_back(i);
  }
  auto mean_of = [&](const std::vector<size_t>& idx) {
    Tensor acc({embeddings[idx.front()].size()});
    for (size_t i : idx) {
      if (embeddings[i].size() != acc.size())
        throw Error(ErrorCode::kDimMismatch, "embeddings differ in dimension");
      for (size_t j = 0; j < acc.size(); ++j) acc[j] += embeddings[i][j];
    }
    for (double& v : acc.data()) v /= static_cast<double>(idx.size());
    return acc;
  };
  for (const std::string& g : out.groups) {
    const std::vector<size_t>& idx = members[g];
    if (idx.size() == 1) {
      out.rows.push_back(mean_of(idx));
      out.cols.push_back(mean_of(idx));
      continue;
    }
    const size_t half = (idx.size() + 1) / 2;
    out.rows.push_back(mean_of({idx.begin(), idx.begin() + static_cast<long>(half)}));
    out.cols.push_back(mean_of({idx.begin() + static_cast<long>(half), idx.end()}));
  }
  return out;
}

Tensor MelStatsEmbedding(const MelSpectrogram& mel) {
  const Tensor& f = mel.frames;
  RequireMatrix(f, "mel frames");
  if (f.rows() == 0) throw Error(ErrorCode::kTooShort, "mel has no frames");
  const size_t bands = f.cols();
  Tensor out({2 * bands});
  for (size_t m = 0; m < bands; ++m) {
    double mean = 0.0;
    for (size_t t = 0; t < f.rows(); ++t) mean += f(t, m);
    mean /= static_cast<double>(f.rows());
    double var = 0.0;
    for (size_t t = 0; t < f.rows(); ++t) var += (f(t, m) - mean) * (f(t, m) - mean);
    out[m] = mean;
    out[bands + m] = std::sqrt(var / static_cast<double>(f.rows()));
  }
  return out;
}

std::string SimilarityCsv(const SimilarityMatrix& m) {
  std::string out;
  char buf[32];
  for (const std::string& id : m.col_ids) out += "," + id;
  out += "\n";
  for (size_t i = 0; i < m.values.rows(); ++i) {
    out += m.row_ids[i];
    for (size_t j = 0; j < m.values.cols(); ++j) {
      std::snprintf(buf, sizeof buf, ",%.9g", m.values(i, j));
      out += buf;
    }
    out += "\n";
  }
  return out;
}

std::vector<uint8_t> SimilarityPgm(const Tensor& values) {
  RequireMatrix(values, "similarity values");
  const std::string header = "P5\n" + std::to_string(values.cols()) + " " +
                             std::to_string(values.rows()) + "\n255\n";
  std::vector<uint8_t> out(header.begin(), header.end());
  for (double v : values.data()) {
    const double level = std::round((std::clamp(v, -1.0, 1.0) + 1.0) * 127.5);
    out.push_back(static_cast<uint8_t>(level));
  }
  return out;
}

}  // namespace agv
