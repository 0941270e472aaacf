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

#include "lir/removal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lir/error.hpp"
#include "lir/linalg.hpp"

namespace lir {

namespace {

void scale_to_unit(std::span<double> v) {
  const double len = norm2(v);
  if (len == 0.0) return;
  for (double& x : v) x /= len;
}

}  // namespace

ComponentBasis fit_components(const LanguageMatrix& m, std::size_t r, const FitOptions& options,
                              std::vector<double>* singular_values) {
  const std::size_t rmax = std::min(m.n(), m.d());
  if (r > rmax) {
    throw Error(ErrorCode::kRankError, "rank " + std::to_string(r) + " exceeds min(n, d) = " + std::to_string(rmax) +
                                           " for language '" + m.lang() + "'");
  }
  Matrix rows = m.rows();
  if (options.normalize) {
    for (std::size_t i = 0; i < rows.rows(); ++i) scale_to_unit(rows.row(i));
  }
  if (options.center) {
    for (std::size_t j = 0; j < rows.cols(); ++j) {
      double mean = 0.0;
      for (std::size_t i = 0; i < rows.rows(); ++i) mean += rows(i, j);
      mean /= static_cast<double>(rows.rows());
      for (std::size_t i = 0; i < rows.rows(); ++i) rows(i, j) -= mean;
    }
  }

  ComponentBasis out;
  out.lang = m.lang();
  out.sample_count = m.n();
  out.source_fingerprint = m.fingerprint();
  if (r == 0 && singular_values == nullptr) {
    out.basis = Matrix(m.d(), 0);
    return out;
  }
  SvdResult f = linalg::svd(rows);
  out.basis = f.v.left_cols(r);
  if (singular_values != nullptr) *singular_values = std::move(f.sigma);
  return out;
}

EmbeddingRecord remove(const EmbeddingRecord& e, const ComponentBasis& basis, RemovalMode mode,
                       const RemoveOptions& options) {
  if (e.dim() != basis.dim()) {
    throw Error(ErrorCode::kDimensionError, "record '" + e.id + "' has dimension " + std::to_string(e.dim()) +
                                                ", basis for '" + basis.lang + "' has " + std::to_string(basis.dim()));
  }
  if (!options.allow_language_mismatch && e.lang != basis.lang) {
    throw Error(ErrorCode::kLanguageMismatch,
                "record '" + e.id + "' is '" + e.lang + "' but the basis was fitted on '" + basis.lang + "'");
  }
  std::vector<double> v = e.vec;
  if (options.normalize) scale_to_unit(v);
  EmbeddingRecord out{e.id, e.lang, {}};
  out.vec = mode == RemovalMode::kOrthogonal ? linalg::project_out(v, basis.basis)
                                             : linalg::project_out_scaled(v, basis.basis);
  return out;
}

std::size_t BatchResult::passed_through_total() const {
  std::size_t total = 0;
  for (const auto& [lang, count] : passed_through) total += count;
  return total;
}

namespace {

void round_to_f32(std::vector<double>& v) {
  for (double& x : v) x = static_cast<double>(static_cast<float>(x));
}

// Rounding an exactly projected vector to f32 leaves |bᵀv| ≤ ‖b‖₁·‖v‖∞·2⁻²⁴
// ≤ √d·‖v‖·2⁻²⁴; the threshold keeps a factor 4 of margin.
bool below_f32_resolution(const std::vector<double>& v, const ComponentBasis& basis) {
  if (v.size() != basis.dim()) return false;
  const double limit = std::sqrt(static_cast<double>(v.size())) * std::ldexp(norm2(v), -22);
  for (std::size_t j = 0; j < basis.rank(); ++j)
    if (std::abs(dot(basis.basis.col(j), v)) > limit) return false;
  return true;
}

}  // namespace

BatchResult remove_batch(std::span<const EmbeddingRecord> records, const BasisMap& bases, RemovalMode mode,
                         const BatchOptions& options) {
  BatchResult result;
  for (const auto& r : records) {
    if (bases.contains(r.lang)) continue;
    if (options.strict) throw Error(ErrorCode::kMissingBasis, "no basis for language '" + r.lang + "'");
    ++result.passed_through[r.lang];
  }
  result.records.resize(records.size());
  const RemoveOptions per_record{.allow_language_mismatch = false, .normalize = options.normalize};
  const bool settle = options.settle_f32 && mode == RemovalMode::kOrthogonal;
  parallel_for(records.size(), options.parallelism, [&](std::size_t i) {
    auto it = bases.find(records[i].lang);
    EmbeddingRecord out;
    if (it == bases.end() || (settle && !options.normalize && below_f32_resolution(records[i].vec, it->second))) {
      out = records[i];
    } else {
      out = remove(records[i], it->second, mode, per_record);
    }
    if (settle) round_to_f32(out.vec);
    result.records[i] = std::move(out);
  });
  return result;
}

}  // namespace lir
