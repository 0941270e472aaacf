// Copyright 2026 The LIR Toolkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "lir/core.hpp"
#include "lir/parallel.hpp"

namespace lir::eval {

/// Candidate ids by descending cosine similarity, ties by ascending id.
struct RankedList {
  std::string query_id;
  std::vector<std::string> ids;
};

/// Cosine similarity; 0 when either vector is zero.
double cosine(std::span<const double> a, std::span<const double> b);

/// Orders ids by descending score, ties by ascending id.
RankedList rank_by_scores(std::string query_id, std::span<const std::string> ids, std::span<const double> scores);

/// Exhaustive cosine ranking. Throws DimensionError.
RankedList rank_candidates(const EmbeddingRecord& query, std::span<const EmbeddingRecord> candidates);

/// (1/|rel|)·Σ precision@rank over relevant items. Throws NoRelevant for an
/// empty set and InvalidData if a relevant id is absent from the ranking.
/// The result is the correctly rounded exact rational whenever its reduced
/// numerator and denominator stay below 2^53.
double average_precision(const RankedList& ranking, const std::set<std::string>& relevant);

struct RetrievalOptions {
  /// Use only the leading `rank` directions of each basis; unset keeps all.
  std::optional<std::size_t> rank;
  RemovalMode mode = RemovalMode::kOrthogonal;
  Parallelism parallelism;
};

/// MAP over all queries, plus MAP grouped by query language. When bases are
/// given, queries and candidates each get their own language's basis
/// (strict: a missing language is MissingBasis).
EvalReport evaluate_retrieval(const RetrievalDataset& ds, const BasisMap* bases, const RetrievalOptions& options = {});

struct LogisticConfig {
  double learning_rate = 0.1;
  std::size_t epochs = 500;
  double l2 = 0.0;
};

/// d weights followed by the bias term.
using LogisticWeights = std::vector<double>;

/// Full-batch gradient descent on mean log-loss + (l2/2)·‖w‖² (bias not
/// penalized), from zero, for exactly `epochs` steps. Labels are 0/1.
/// Throws DegenerateLabels when only one class is present, DimensionError
/// on shape mismatch, InvalidMatrix for non-finite features.
LogisticWeights train_logistic(const Matrix& features, std::span<const int> labels, const LogisticConfig& config);

/// Same as train_logistic, also recording the training loss before each step.
LogisticWeights train_logistic(const Matrix& features, std::span<const int> labels, const LogisticConfig& config,
                               std::vector<double>* loss_trace);

double logistic_loss(const Matrix& features, std::span<const int> labels, const LogisticWeights& w, double l2);
double predict_probability(std::span<const double> x, const LogisticWeights& w);
double accuracy(const Matrix& features, std::span<const int> labels, const LogisticWeights& w);

struct LabeledRecords {
  std::vector<EmbeddingRecord> records;
  std::vector<int> labels;
};

enum class Placement {
  kTrainAndEval,  // bases applied to training and test features
  kEvalOnly,      // bases applied to test features only
};

std::string_view to_string(Placement placement);
/// Accepts "both" and "eval".
Placement parse_placement(std::string_view text);

struct TransferOptions {
  std::optional<std::size_t> rank;
  RemovalMode mode = RemovalMode::kOrthogonal;
  Placement placement = Placement::kTrainAndEval;
  LogisticConfig logistic;
};

struct TransferReport {
  std::map<LangCode, double> accuracy;
  double average = 0.0;  // unweighted mean over evaluated languages
  LangCode train_language;
  std::size_t rank = 0;
  std::optional<RemovalMode> mode;
  Placement placement = Placement::kTrainAndEval;
  LogisticConfig logistic;
  std::string train_fingerprint;
  std::map<LangCode, std::string> basis_fingerprints;
};

/// Zero-shot transfer: train once on `train` (a single language), report
/// accuracy on every test language.
TransferReport evaluate_transfer(const LabeledRecords& train, const std::map<LangCode, LabeledRecords>& tests,
                                 const BasisMap* bases, const TransferOptions& options = {});

struct ProjectionRow {
  std::string id;
  LangCode lang;
  std::vector<double> scores;
};

/// Joint PCA of all records (every language stacked), one row per record.
std::vector<ProjectionRow> export_projection(std::span<const EmbeddingRecord> records, std::size_t k);

/// Mean pairwise distance between per-group centroids of the first `dims`
/// score columns. Groups with a single centroid give 0.
double mean_centroid_distance(std::span<const ProjectionRow> rows, const std::vector<std::string>& group_of,
                              std::size_t dims);

/// Ratio of the mean distance between language centroids to the mean
/// distance between topic centroids, over the first `dims` score columns.
/// `topic_of` is aligned with `rows`; languages come from the rows. Large
/// values mean languages form separate clusters; near zero means they
/// overlap while topics stay apart.
double language_separation(std::span<const ProjectionRow> rows, const std::vector<std::string>& topic_of,
                           std::size_t dims);

}  // namespace lir::eval
