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
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lir/linalg.hpp"

namespace lir {

using LangCode = std::string;

/// One embedding vector tagged with an id and a language.
struct EmbeddingRecord {
  std::string id;
  LangCode lang;
  std::vector<double> vec;

  std::size_t dim() const noexcept { return vec.size(); }
  friend bool operator==(const EmbeddingRecord&, const EmbeddingRecord&) = default;
};

/// Checks the collection invariants: d ≥ 1 shared by every record, finite
/// coordinates, unique ids. Throws DimensionError, InvalidData or
/// DuplicateKey. Returns d, or 0 for an empty collection.
std::size_t validate_collection(std::span<const EmbeddingRecord> records);

/// Language codes are opaque; only surrounding whitespace is dropped.
LangCode normalize_lang(std::string_view code);

/// FNV-1a 64 over the exact bytes of the given doubles, as 16 hex digits.
std::string fingerprint(std::span<const double> values);
std::string fingerprint(std::span<const EmbeddingRecord> records);

/// n×d matrix whose rows are embeddings of a single language.
class LanguageMatrix {
 public:
  /// Throws InvalidData if records is empty or mixes languages, plus
  /// everything validate_collection throws.
  explicit LanguageMatrix(std::span<const EmbeddingRecord> records);
  LanguageMatrix(LangCode lang, Matrix rows);

  const LangCode& lang() const noexcept { return lang_; }
  const Matrix& rows() const noexcept { return rows_; }
  std::size_t n() const noexcept { return rows_.rows(); }
  std::size_t d() const noexcept { return rows_.cols(); }
  /// Checksum of the row data; identifies the fitting corpus.
  std::string fingerprint() const;

 private:
  LangCode lang_;
  Matrix rows_;
};

/// d×r orthonormal language-identity directions for one language.
struct ComponentBasis {
  LangCode lang;
  Matrix basis;  // d × r
  std::string source_fingerprint;
  std::uint64_t sample_count = 0;

  std::size_t dim() const noexcept { return basis.rows(); }
  std::size_t rank() const noexcept { return basis.cols(); }
  /// Leading `r` directions of this basis. Throws RankError if r > rank().
  ComponentBasis truncated(std::size_t r) const;
};

using BasisMap = std::map<LangCode, ComponentBasis>;

enum class RemovalMode { kOrthogonal, kPaperEq1 };

std::string_view to_string(RemovalMode mode);
/// Accepts "orthogonal" and "paper-eq1". Throws ConfigError otherwise.
RemovalMode parse_removal_mode(std::string_view text);

/// Queries, candidates and the relevant-candidate sets per query.
struct RetrievalDataset {
  std::vector<EmbeddingRecord> queries;
  std::vector<EmbeddingRecord> candidates;
  std::map<std::string, std::set<std::string>> qrels;

  /// Throws InvalidData for an unknown query or candidate id, NoRelevant
  /// for a query without relevant candidates, and propagates
  /// validate_collection errors (including a query/candidate dim mismatch).
  void validate() const;
};

struct EvalConfig {
  std::size_t rank = 0;
  std::optional<RemovalMode> mode;  // unset when no bases were applied
  std::string similarity = "cosine";
  std::string queries_fingerprint;
  std::string candidates_fingerprint;
  std::map<LangCode, std::string> basis_fingerprints;
};

struct EvalReport {
  double overall_map = 0.0;
  std::map<LangCode, double> per_language_map;  // keyed by query language
  std::size_t query_count = 0;
  EvalConfig config;
};

}  // namespace lir
