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

#include "lir/core.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <unordered_set>

#include "lir/error.hpp"

namespace lir {

std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidMatrix: return "InvalidMatrix";
    case ErrorCode::kNumericalFailure: return "NumericalFailure";
    case ErrorCode::kDimensionError: return "DimensionError";
    case ErrorCode::kZeroVector: return "ZeroVectorError";
    case ErrorCode::kRankError: return "RankError";
    case ErrorCode::kLanguageMismatch: return "LanguageMismatch";
    case ErrorCode::kMissingBasis: return "MissingBasis";
    case ErrorCode::kNoRelevant: return "NoRelevantError";
    case ErrorCode::kDegenerateLabels: return "DegenerateLabels";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kFormatError: return "FormatError";
    case ErrorCode::kTruncatedFile: return "TruncatedFile";
    case ErrorCode::kCorruptBasis: return "CorruptBasis";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kDuplicateKey: return "DuplicateKey";
    case ErrorCode::kInvalidData: return "InvalidData";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(error_name(code)) + ": " + message), code_(code) {}

Error Error::at_line(ErrorCode code, std::size_t line, const std::string& message) {
  Error e(code, "line " + std::to_string(line) + ": " + message);
  e.line_ = line;
  return e;
}

Error Error::numerical(std::size_t iterations, const std::string& message) {
  Error e(ErrorCode::kNumericalFailure, message + " (after " + std::to_string(iterations) + " iterations)");
  e.iterations_ = iterations;
  return e;
}

std::size_t validate_collection(std::span<const EmbeddingRecord> records) {
  if (records.empty()) return 0;
  const std::size_t d = records.front().dim();
  if (d == 0) throw Error(ErrorCode::kDimensionError, "record '" + records.front().id + "' has no coordinates");
  std::unordered_set<std::string_view> seen;
  seen.reserve(records.size());
  for (const auto& r : records) {
    if (r.dim() != d) {
      throw Error(ErrorCode::kDimensionError, "record '" + r.id + "' has dimension " + std::to_string(r.dim()) +
                                                  ", expected " + std::to_string(d));
    }
    for (double x : r.vec) {
      if (!std::isfinite(x)) throw Error(ErrorCode::kInvalidData, "record '" + r.id + "' has a non-finite coordinate");
    }
    if (!seen.insert(r.id).second) throw Error(ErrorCode::kDuplicateKey, "duplicate record id '" + r.id + "'");
  }
  return d;
}

LangCode normalize_lang(std::string_view code) {
  constexpr std::string_view kSpace = " \t\r\n\f\v";
  const auto first = code.find_first_not_of(kSpace);
  if (first == std::string_view::npos) return {};
  const auto last = code.find_last_not_of(kSpace);
  return LangCode(code.substr(first, last - first + 1));
}

namespace {

constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

void fnv_bytes(std::uint64_t& h, const void* data, std::size_t size) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= kFnvPrime;
  }
}

void fnv_doubles(std::uint64_t& h, std::span<const double> values) {
  for (double v : values) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    // Little-endian byte order regardless of host.
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xffU;
      h *= kFnvPrime;
    }
  }
}

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

std::string fingerprint(std::span<const double> values) {
  std::uint64_t h = kFnvOffset;
  fnv_doubles(h, values);
  return hex64(h);
}

std::string fingerprint(std::span<const EmbeddingRecord> records) {
  std::uint64_t h = kFnvOffset;
  for (const auto& r : records) {
    fnv_bytes(h, r.id.data(), r.id.size());
    h ^= 0xffU;
    h *= kFnvPrime;
    fnv_bytes(h, r.lang.data(), r.lang.size());
    h ^= 0xffU;
    h *= kFnvPrime;
    fnv_doubles(h, r.vec);
  }
  return hex64(h);
}

LanguageMatrix::LanguageMatrix(std::span<const EmbeddingRecord> records) {
  if (records.empty()) throw Error(ErrorCode::kInvalidData, "language matrix needs at least one record");
  const std::size_t d = validate_collection(records);
  lang_ = records.front().lang;
  rows_ = Matrix(records.size(), d);
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].lang != lang_) {
      throw Error(ErrorCode::kInvalidData,
                  "language matrix mixes '" + lang_ + "' and '" + records[i].lang + "' (record '" + records[i].id + "')");
    }
    std::copy(records[i].vec.begin(), records[i].vec.end(), rows_.row(i).begin());
  }
}

LanguageMatrix::LanguageMatrix(LangCode lang, Matrix rows) : lang_(std::move(lang)), rows_(std::move(rows)) {
  if (rows_.rows() == 0 || rows_.cols() == 0) throw Error(ErrorCode::kInvalidData, "language matrix must be non-empty");
  if (!rows_.all_finite()) throw Error(ErrorCode::kInvalidData, "language matrix has non-finite entries");
}

std::string LanguageMatrix::fingerprint() const { return lir::fingerprint(rows_.data()); }

ComponentBasis ComponentBasis::truncated(std::size_t r) const {
  if (r > rank()) {
    throw Error(ErrorCode::kRankError,
                "requested rank " + std::to_string(r) + " exceeds stored rank " + std::to_string(rank()) + " for '" +
                    lang + "'");
  }
  ComponentBasis out = *this;
  out.basis = basis.left_cols(r);
  return out;
}

std::string_view to_string(RemovalMode mode) {
  return mode == RemovalMode::kOrthogonal ? "orthogonal" : "paper-eq1";
}

RemovalMode parse_removal_mode(std::string_view text) {
  if (text == "orthogonal") return RemovalMode::kOrthogonal;
  if (text == "paper-eq1") return RemovalMode::kPaperEq1;
  throw Error(ErrorCode::kConfigError, "unknown removal mode '" + std::string(text) + "'");
}

void RetrievalDataset::validate() const {
  validate_collection(queries);
  validate_collection(candidates);
  if (!queries.empty() && !candidates.empty() && queries.front().dim() != candidates.front().dim()) {
    throw Error(ErrorCode::kDimensionError, "queries have dimension " + std::to_string(queries.front().dim()) +
                                                ", candidates " + std::to_string(candidates.front().dim()));
  }
  std::unordered_set<std::string_view> query_ids;
  std::unordered_set<std::string_view> candidate_ids;
  for (const auto& q : queries) query_ids.insert(q.id);
  for (const auto& c : candidates) candidate_ids.insert(c.id);
  for (const auto& [qid, rel] : qrels) {
    if (!query_ids.contains(qid)) throw Error(ErrorCode::kInvalidData, "qrels reference unknown query '" + qid + "'");
    for (const auto& cid : rel) {
      if (!candidate_ids.contains(cid)) {
        throw Error(ErrorCode::kInvalidData, "qrels for '" + qid + "' reference unknown candidate '" + cid + "'");
      }
    }
  }
  for (const auto& q : queries) {
    auto it = qrels.find(q.id);
    if (it == qrels.end() || it->second.empty()) {
      throw Error(ErrorCode::kNoRelevant, "query '" + q.id + "' has no relevant candidates");
    }
  }
}

}  // namespace lir
