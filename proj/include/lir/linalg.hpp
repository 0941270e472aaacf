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
#include <span>
#include <vector>

namespace lir {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::vector<double> col(std::size_t c) const;

  const std::vector<double>& data() const noexcept { return data_; }
  std::vector<double>& data() noexcept { return data_; }

  Matrix transposed() const;
  /// Leading `count` columns.
  Matrix left_cols(std::size_t count) const;
  bool all_finite() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix multiply(const Matrix& a, const Matrix& b);
/// aᵀ·b without forming the transpose.
Matrix multiply_at_b(const Matrix& a, const Matrix& b);
double frobenius_norm(const Matrix& m);
/// max |aᵀa − I|.
double orthonormality_error(const Matrix& a);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> v);

/// Thin factorization m = u·diag(sigma)·vᵀ with k = min(rows, cols).
struct SvdResult {
  Matrix u;                   // rows × k
  std::vector<double> sigma;  // k, non-increasing, non-negative
  Matrix v;                   // cols × k
};

namespace linalg {

/// Jacobi sweeps allowed before svd() reports NumericalFailure.
inline constexpr std::size_t kMaxSweeps = 100;

/// Thin SVD. Householder QR reduces a tall input to its k×k triangular
/// factor, then one-sided (Hestenes) Jacobi orthogonalizes its columns.
/// Wide inputs are factored through their transpose.
///
/// Output is a pure function of the input bytes. Each column of v is
/// oriented so its largest-magnitude entry (first one on ties) is
/// non-negative; the matching u column is flipped with it.
///
/// Throws InvalidMatrix for empty or non-finite input, NumericalFailure when
/// Jacobi does not converge within kMaxSweeps.
SvdResult svd(const Matrix& m);

/// v − B·(Bᵀv), the component of v orthogonal to span(B).
/// B is d×r with orthonormal columns; r = 0 returns v.
std::vector<double> project_out(std::span<const double> v, const Matrix& basis);

/// v − B·(Bᵀv)/‖v‖₂, the removal formula taken literally. Agrees with
/// project_out only when ‖v‖ = 1 and is not idempotent otherwise.
/// Throws ZeroVector when ‖v‖ = 0.
std::vector<double> project_out_scaled(std::span<const double> v, const Matrix& basis);

/// Column means subtracted, then the first k principal scores (U·Σ columns).
/// Requires rows ≥ 2 and 1 ≤ k ≤ min(rows, cols); otherwise RankError.
Matrix pca_project(const Matrix& m, std::size_t k);

/// Flips each column of v (and the same column of u, if given) so that its
/// largest-magnitude entry is non-negative.
void orient_columns(Matrix& v, Matrix* u);

}  // namespace linalg
}  // namespace lir
