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
#include <span>
#include <vector>

#include "lir/core.hpp"
#include "lir/parallel.hpp"

namespace lir {

/// Rows recommended per language when fitting components. Estimates
/// stop improving noticeably beyond this size; smaller samples are
/// accepted.
inline constexpr std::size_t kRecommendedFitRows = 10000;

struct FitOptions {
  /// Subtract the column means before factoring. Off by default: the
  /// language centroid is exactly the direction the raw factorization is
  /// expected to find.
  bool center = false;
  /// Scale every row to unit length before factoring.
  bool normalize = false;
};

/// Language-identity components: the first r right singular vectors of the
/// language matrix. r = 0 yields an empty d×0 basis. Throws RankError when
/// r > min(n, d); SVD errors propagate. When `singular_values` is given it
/// receives the full spectrum of the (preprocessed) matrix.
ComponentBasis fit_components(const LanguageMatrix& m, std::size_t r, const FitOptions& options = {},
                              std::vector<double>* singular_values = nullptr);

struct RemoveOptions {
  /// Apply a basis fitted on a different language without complaint.
  bool allow_language_mismatch = false;
  /// Scale the vector to unit length before removal. Makes both modes agree.
  bool normalize = false;
};

/// Removes the basis directions from one embedding; id and lang are kept.
/// Throws DimensionError, LanguageMismatch, or ZeroVector (PaperEq1 only).
EmbeddingRecord remove(const EmbeddingRecord& e, const ComponentBasis& basis,
                       RemovalMode mode = RemovalMode::kOrthogonal, const RemoveOptions& options = {});

struct BatchOptions {
  /// Fail with MissingBasis on a language without a basis. When false such
  /// records pass through unchanged and are counted.
  bool strict = true;
  bool normalize = false;
  /// Orthogonal mode only: outputs are rounded to f32, and a record whose
  /// components along its basis are already below f32 resolution
  /// (√d·2⁻²²·‖v‖ per direction) is left as is. Re-applying to stored f32
  /// output is then a bitwise no-op.
  bool settle_f32 = false;
  Parallelism parallelism;
};

struct BatchResult {
  std::vector<EmbeddingRecord> records;  // input order
  std::map<LangCode, std::size_t> passed_through;
  std::size_t passed_through_total() const;
};

/// Applies each record's own language basis. Output is in input order and
/// identical for any thread count.
BatchResult remove_batch(std::span<const EmbeddingRecord> records, const BasisMap& bases,
                         RemovalMode mode = RemovalMode::kOrthogonal, const BatchOptions& options = {});

}  // namespace lir
