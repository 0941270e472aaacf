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

#include "lir/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>

#include "lir/error.hpp"
#include "lir/linalg.hpp"
#include "lir/removal.hpp"

namespace lir::eval {

namespace {

double cosine_with_norms(std::span<const double> a, double norm_a, std::span<const double> b, double norm_b) {
  if (norm_a == 0.0 || norm_b == 0.0) return 0.0;
  return dot(a, b) / (norm_a * norm_b);
}

void check_dims(const EmbeddingRecord& query, std::span<const EmbeddingRecord> candidates) {
  for (const auto& c : candidates) {
    if (c.dim() != query.dim()) {
      throw Error(ErrorCode::kDimensionError, "candidate '" + c.id + "' has dimension " + std::to_string(c.dim()) +
                                                  ", query '" + query.id + "' has " + std::to_string(query.dim()));
    }
  }
}

BasisMap truncate_all(const BasisMap& bases, std::optional<std::size_t> rank) {
  if (!rank) return bases;
  BasisMap out;
  for (const auto& [lang, b] : bases) out.emplace(lang, b.truncated(*rank));
  return out;
}

std::size_t effective_rank(const BasisMap& bases) {
  std::size_t r = 0;
  for (const auto& [lang, b] : bases) r = std::max(r, b.rank());
  return r;
}

std::map<LangCode, std::string> basis_fingerprints(const BasisMap& bases) {
  std::map<LangCode, std::string> out;
  for (const auto& [lang, b] : bases) out[lang] = fingerprint(b.basis.data());
  return out;
}

}  // namespace

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::kDimensionError, "cosine of vectors with different dimensions");
  return cosine_with_norms(a, norm2(a), b, norm2(b));
}

RankedList rank_by_scores(std::string query_id, std::span<const std::string> ids, std::span<const double> scores) {
  if (ids.size() != scores.size()) throw Error(ErrorCode::kDimensionError, "ids and scores differ in length");
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (scores[x] != scores[y]) return scores[x] > scores[y];
    return ids[x] < ids[y];
  });
  RankedList out{std::move(query_id), {}};
  out.ids.reserve(ids.size());
  for (std::size_t i : order) out.ids.push_back(ids[i]);
  return out;
}

RankedList rank_candidates(const EmbeddingRecord& query, std::span<const EmbeddingRecord> candidates) {
  check_dims(query, candidates);
  const double qn = norm2(query.vec);
  std::vector<std::string> ids;
  std::vector<double> scores;
  ids.reserve(candidates.size());
  scores.reserve(candidates.size());
  for (const auto& c : candidates) {
    ids.push_back(c.id);
    scores.push_back(cosine_with_norms(query.vec, qn, c.vec, norm2(c.vec)));
  }
  return rank_by_scores(query.id, ids, scores);
}

namespace {

// Exact running sum num/den of hits/rank terms, reduced after every step.
// Gives up (returns false) once a value no longer fits in 53 bits.
class ExactSum {
 public:
  bool add(std::uint64_t p, std::uint64_t q) {
    if (!exact_) return false;
    const std::uint64_t g = std::gcd(den_, q);
    std::uint64_t lhs = 0;
    std::uint64_t rhs = 0;
    std::uint64_t den = 0;
    if (__builtin_mul_overflow(num_, q / g, &lhs) || __builtin_mul_overflow(p, den_ / g, &rhs) ||
        __builtin_add_overflow(lhs, rhs, &num_) || __builtin_mul_overflow(den_, q / g, &den)) {
      exact_ = false;
      return false;
    }
    den_ = den;
    reduce();
    return true;
  }

  /// num/(den·k), correctly rounded when both parts fit in a double mantissa.
  std::optional<double> divided_by(std::uint64_t k) {
    if (!exact_) return std::nullopt;
    const std::uint64_t g = std::gcd(num_, k);
    std::uint64_t den = 0;
    if (__builtin_mul_overflow(den_, k / g, &den)) return std::nullopt;
    const std::uint64_t num = num_ / g;
    constexpr std::uint64_t kMantissa = std::uint64_t{1} << 53;
    if (num > kMantissa || den > kMantissa) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
  }

 private:
  void reduce() {
    const std::uint64_t g = std::gcd(num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
  }

  std::uint64_t num_ = 0;
  std::uint64_t den_ = 1;
  bool exact_ = true;
};

}  // namespace

double average_precision(const RankedList& ranking, const std::set<std::string>& relevant) {
  if (relevant.empty()) throw Error(ErrorCode::kNoRelevant, "query '" + ranking.query_id + "' has no relevant items");
  double sum = 0.0;
  ExactSum exact;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < ranking.ids.size() && hits < relevant.size(); ++i) {
    if (!relevant.contains(ranking.ids[i])) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(i + 1);
    exact.add(hits, i + 1);
  }
  if (hits != relevant.size()) {
    throw Error(ErrorCode::kInvalidData, "query '" + ranking.query_id + "': " +
                                             std::to_string(relevant.size() - hits) +
                                             " relevant id(s) are missing from the ranking");
  }
  if (const auto rounded = exact.divided_by(relevant.size())) return *rounded;
  return sum / static_cast<double>(relevant.size());
}

EvalReport evaluate_retrieval(const RetrievalDataset& ds, const BasisMap* bases, const RetrievalOptions& options) {
  ds.validate();

  EvalReport report;
  report.config.queries_fingerprint = fingerprint(ds.queries);
  report.config.candidates_fingerprint = fingerprint(ds.candidates);

  std::vector<EmbeddingRecord> queries;
  std::vector<EmbeddingRecord> candidates;
  const std::vector<EmbeddingRecord>* qs = &ds.queries;
  const std::vector<EmbeddingRecord>* cs = &ds.candidates;
  if (bases != nullptr) {
    const BasisMap used = truncate_all(*bases, options.rank);
    const BatchOptions batch{.strict = true, .normalize = false, .parallelism = options.parallelism};
    queries = remove_batch(ds.queries, used, options.mode, batch).records;
    candidates = remove_batch(ds.candidates, used, options.mode, batch).records;
    qs = &queries;
    cs = &candidates;
    report.config.rank = options.rank.value_or(effective_rank(used));
    report.config.mode = options.mode;
    report.config.basis_fingerprints = basis_fingerprints(used);
  }

  std::vector<std::string> cand_ids;
  std::vector<double> cand_norms;
  cand_ids.reserve(cs->size());
  cand_norms.reserve(cs->size());
  for (const auto& c : *cs) {
    cand_ids.push_back(c.id);
    cand_norms.push_back(norm2(c.vec));
  }

  std::vector<double> ap(qs->size());
  parallel_for(qs->size(), options.parallelism, [&](std::size_t i) {
    const auto& q = (*qs)[i];
    const double qn = norm2(q.vec);
    std::vector<double> scores(cs->size());
    for (std::size_t j = 0; j < cs->size(); ++j) scores[j] = cosine_with_norms(q.vec, qn, (*cs)[j].vec, cand_norms[j]);
    ap[i] = average_precision(rank_by_scores(q.id, cand_ids, scores), ds.qrels.at(q.id));
  });

  std::map<LangCode, std::pair<double, std::size_t>> by_lang;
  double total = 0.0;
  for (std::size_t i = 0; i < qs->size(); ++i) {
    total += ap[i];
    auto& [sum, count] = by_lang[(*qs)[i].lang];
    sum += ap[i];
    ++count;
  }
  report.query_count = qs->size();
  report.overall_map = qs->empty() ? 0.0 : total / static_cast<double>(qs->size());
  for (const auto& [lang, acc] : by_lang) report.per_language_map[lang] = acc.first / static_cast<double>(acc.second);
  return report;
}

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double logit(std::span<const double> x, const LogisticWeights& w) {
  double z = w.back();
  for (std::size_t j = 0; j < x.size(); ++j) z += w[j] * x[j];
  return z;
}

void check_training_set(const Matrix& features, std::span<const int> labels) {
  if (features.rows() != labels.size()) {
    throw Error(ErrorCode::kDimensionError, std::to_string(features.rows()) + " feature rows but " +
                                                std::to_string(labels.size()) + " labels");
  }
  if (features.rows() < 2) throw Error(ErrorCode::kDegenerateLabels, "need at least two training examples");
  if (features.cols() == 0) throw Error(ErrorCode::kDimensionError, "features have no columns");
  if (!features.all_finite()) throw Error(ErrorCode::kInvalidMatrix, "features have non-finite entries");
  bool pos = false;
  bool neg = false;
  for (int y : labels) {
    if (y != 0 && y != 1) throw Error(ErrorCode::kInvalidData, "labels must be 0 or 1");
    (y == 1 ? pos : neg) = true;
  }
  if (!pos || !neg) throw Error(ErrorCode::kDegenerateLabels, "training labels contain a single class");
}

}  // namespace

double predict_probability(std::span<const double> x, const LogisticWeights& w) {
  if (w.size() != x.size() + 1) throw Error(ErrorCode::kDimensionError, "weight vector does not match features");
  return sigmoid(logit(x, w));
}

double logistic_loss(const Matrix& features, std::span<const int> labels, const LogisticWeights& w, double l2) {
  double sum = 0.0;
  for (std::size_t i = 0; i < features.rows(); ++i) {
    const double z = logit(features.row(i), w);
    sum += softplus(z) - labels[i] * z;
  }
  double penalty = 0.0;
  for (std::size_t j = 0; j + 1 < w.size(); ++j) penalty += w[j] * w[j];
  return sum / static_cast<double>(features.rows()) + 0.5 * l2 * penalty;
}

LogisticWeights train_logistic(const Matrix& features, std::span<const int> labels, const LogisticConfig& config) {
  return train_logistic(features, labels, config, nullptr);
}

LogisticWeights train_logistic(const Matrix& features, std::span<const int> labels, const LogisticConfig& config,
                               std::vector<double>* loss_trace) {
  check_training_set(features, labels);
  const std::size_t n = features.rows();
  const std::size_t d = features.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  LogisticWeights w(d + 1, 0.0);
  std::vector<double> grad(d + 1);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    if (loss_trace != nullptr) loss_trace->push_back(logistic_loss(features, labels, w, config.l2));
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto x = features.row(i);
      const double err = sigmoid(logit(x, w)) - labels[i];
      for (std::size_t j = 0; j < d; ++j) grad[j] += err * x[j];
      grad[d] += err;
    }
    for (std::size_t j = 0; j < d; ++j) w[j] -= config.learning_rate * (grad[j] * inv_n + config.l2 * w[j]);
    w[d] -= config.learning_rate * grad[d] * inv_n;
  }
  if (loss_trace != nullptr) loss_trace->push_back(logistic_loss(features, labels, w, config.l2));
  return w;
}

double accuracy(const Matrix& features, std::span<const int> labels, const LogisticWeights& w) {
  if (features.rows() != labels.size()) throw Error(ErrorCode::kDimensionError, "feature rows and labels differ");
  if (features.rows() == 0) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < features.rows(); ++i) {
    const int predicted = predict_probability(features.row(i), w) >= 0.5 ? 1 : 0;
    if (predicted == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(features.rows());
}

std::string_view to_string(Placement placement) {
  return placement == Placement::kTrainAndEval ? "both" : "eval";
}

Placement parse_placement(std::string_view text) {
  if (text == "both") return Placement::kTrainAndEval;
  if (text == "eval") return Placement::kEvalOnly;
  throw Error(ErrorCode::kConfigError, "unknown placement '" + std::string(text) + "'");
}

namespace {

Matrix stack(std::span<const EmbeddingRecord> records) {
  const std::size_t d = records.empty() ? 0 : records.front().dim();
  Matrix m(records.size(), d);
  for (std::size_t i = 0; i < records.size(); ++i) std::copy(records[i].vec.begin(), records[i].vec.end(), m.row(i).begin());
  return m;
}

void check_labeled(const LabeledRecords& set, const std::string& what) {
  if (set.records.size() != set.labels.size()) {
    throw Error(ErrorCode::kDimensionError, what + ": " + std::to_string(set.records.size()) + " records but " +
                                                std::to_string(set.labels.size()) + " labels");
  }
  validate_collection(set.records);
}

}  // namespace

TransferReport evaluate_transfer(const LabeledRecords& train, const std::map<LangCode, LabeledRecords>& tests,
                                 const BasisMap* bases, const TransferOptions& options) {
  check_labeled(train, "training set");
  if (train.records.empty()) throw Error(ErrorCode::kDegenerateLabels, "empty training set");
  const LangCode train_lang = train.records.front().lang;
  for (const auto& r : train.records) {
    if (r.lang != train_lang) {
      throw Error(ErrorCode::kInvalidData, "training set mixes '" + train_lang + "' and '" + r.lang + "'");
    }
  }
  const std::size_t d = train.records.front().dim();
  for (const auto& [lang, set] : tests) {
    check_labeled(set, "test set '" + lang + "'");
    if (!set.records.empty() && set.records.front().dim() != d) {
      throw Error(ErrorCode::kDimensionError, "test set '" + lang + "' has dimension " +
                                                  std::to_string(set.records.front().dim()) + ", training " +
                                                  std::to_string(d));
    }
  }

  TransferReport report;
  report.train_language = train_lang;
  report.placement = options.placement;
  report.logistic = options.logistic;
  report.train_fingerprint = fingerprint(train.records);

  BasisMap used;
  if (bases != nullptr) {
    used = truncate_all(*bases, options.rank);
    report.rank = options.rank.value_or(effective_rank(used));
    report.mode = options.mode;
    report.basis_fingerprints = basis_fingerprints(used);
  }
  const BatchOptions batch{.strict = true, .normalize = false, .parallelism = {}};

  Matrix train_features = stack(train.records);
  if (bases != nullptr && options.placement == Placement::kTrainAndEval) {
    train_features = stack(remove_batch(train.records, used, options.mode, batch).records);
  }
  const LogisticWeights w = train_logistic(train_features, train.labels, options.logistic);

  double sum = 0.0;
  for (const auto& [lang, set] : tests) {
    Matrix features =
        bases != nullptr ? stack(remove_batch(set.records, used, options.mode, batch).records) : stack(set.records);
    const double acc = accuracy(features, set.labels, w);
    report.accuracy[lang] = acc;
    sum += acc;
  }
  report.average = tests.empty() ? 0.0 : sum / static_cast<double>(tests.size());
  return report;
}

std::vector<ProjectionRow> export_projection(std::span<const EmbeddingRecord> records, std::size_t k) {
  if (records.size() < 2) throw Error(ErrorCode::kRankError, "projection needs at least 2 records");
  validate_collection(records);
  const Matrix scores = linalg::pca_project(stack(records), k);
  std::vector<ProjectionRow> rows;
  rows.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto s = scores.row(i);
    rows.push_back({records[i].id, records[i].lang, {s.begin(), s.end()}});
  }
  return rows;
}

double mean_centroid_distance(std::span<const ProjectionRow> rows, const std::vector<std::string>& group_of,
                              std::size_t dims) {
  if (group_of.size() != rows.size()) throw Error(ErrorCode::kDimensionError, "group labels do not match rows");
  std::map<std::string, std::pair<std::vector<double>, std::size_t>> acc;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].scores.size() < dims) throw Error(ErrorCode::kDimensionError, "row has fewer score columns than dims");
    auto& [sum, count] = acc[group_of[i]];
    sum.resize(dims, 0.0);
    for (std::size_t j = 0; j < dims; ++j) sum[j] += rows[i].scores[j];
    ++count;
  }
  std::vector<std::vector<double>> centroids;
  for (auto& [group, entry] : acc) {
    for (double& x : entry.first) x /= static_cast<double>(entry.second);
    centroids.push_back(entry.first);
  }
  double total = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < centroids.size(); ++a) {
    for (std::size_t b = a + 1; b < centroids.size(); ++b) {
      double s = 0.0;
      for (std::size_t j = 0; j < dims; ++j) {
        const double diff = centroids[a][j] - centroids[b][j];
        s += diff * diff;
      }
      total += std::sqrt(s);
      ++pairs;
    }
  }
  return pairs == 0 ? 0.0 : total / static_cast<double>(pairs);
}

double language_separation(std::span<const ProjectionRow> rows, const std::vector<std::string>& topic_of,
                           std::size_t dims) {
  std::vector<std::string> lang_of;
  lang_of.reserve(rows.size());
  for (const auto& r : rows) lang_of.push_back(r.lang);
  const double between_languages = mean_centroid_distance(rows, lang_of, dims);
  const double between_topics = mean_centroid_distance(rows, topic_of, dims);
  if (between_topics == 0.0) {
    throw Error(ErrorCode::kInvalidData, "topic centroids coincide; separation is undefined");
  }
  return between_languages / between_topics;
}

}  // namespace lir::eval
