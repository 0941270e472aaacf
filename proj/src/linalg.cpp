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

#include "lir/linalg.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numeric>
#include <string>

#include "lir/error.hpp"

namespace lir {

Matrix::Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw Error(ErrorCode::kDimensionError, "matrix data has " + std::to_string(data_.size()) + " entries, expected " +
                                                std::to_string(rows_ * cols_));
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  Matrix m(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) throw Error(ErrorCode::kDimensionError, "ragged rows");
    std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
  }
  return m;
}

std::vector<double> Matrix::col(std::size_t c) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

Matrix Matrix::left_cols(std::size_t count) const {
  if (count > cols_) throw Error(ErrorCode::kRankError, "cannot take " + std::to_string(count) + " of " +
                                                            std::to_string(cols_) + " columns");
  Matrix out(rows_, count);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < count; ++c) out(r, c) = (*this)(r, c);
  return out;
}

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

Matrix multiply(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw Error(ErrorCode::kDimensionError, "multiply: inner dimensions differ");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto dst = out.row(i);
    for (std::size_t l = 0; l < a.cols(); ++l) {
      const double s = a(i, l);
      const auto src = b.row(l);
      for (std::size_t j = 0; j < b.cols(); ++j) dst[j] += s * src[j];
    }
  }
  return out;
}

Matrix multiply_at_b(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw Error(ErrorCode::kDimensionError, "multiply_at_b: row counts differ");
  Matrix out(a.cols(), b.cols());
  for (std::size_t l = 0; l < a.rows(); ++l) {
    const auto ar = a.row(l);
    const auto br = b.row(l);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      auto dst = out.row(i);
      for (std::size_t j = 0; j < b.cols(); ++j) dst[j] += ar[i] * br[j];
    }
  }
  return out;
}

double frobenius_norm(const Matrix& m) { return norm2(m.data()); }

double orthonormality_error(const Matrix& a) {
  const Matrix g = multiply_at_b(a, a);
  double worst = 0.0;
  for (std::size_t i = 0; i < g.rows(); ++i)
    for (std::size_t j = 0; j < g.cols(); ++j) worst = std::max(worst, std::abs(g(i, j) - (i == j ? 1.0 : 0.0)));
  return worst;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> v) {
  // Scaled accumulation so huge or tiny entries neither overflow nor vanish.
  double scale = 0.0;
  for (double x : v) scale = std::max(scale, std::abs(x));
  if (scale == 0.0) return 0.0;
  double s = 0.0;
  for (double x : v) {
    const double y = x / scale;
    s += y * y;
  }
  return scale * std::sqrt(s);
}

namespace linalg {
namespace {

// Column-major scratch storage: column c occupies [c*rows, (c+1)*rows).
struct ColMajor {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  ColMajor(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  double* col(std::size_t c) { return data.data() + c * rows; }
  const double* col(std::size_t c) const { return data.data() + c * rows; }
};

double col_dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

struct Factorization {
  ColMajor u;  // rows × k
  std::vector<double> sigma;
  ColMajor v;  // k × k
};

// Householder QR of a tall (rows ≥ cols) column-major matrix. On return `a`
// holds R in its upper triangle; `q` is the thin rows×cols orthonormal factor.
void householder_qr(ColMajor& a, ColMajor& q) {
  const std::size_t m = a.rows;
  const std::size_t n = a.cols;
  std::vector<std::vector<double>> reflectors(n);
  for (std::size_t j = 0; j < n; ++j) {
    double* x = a.col(j) + j;
    const std::size_t len = m - j;
    const double xnorm = norm2({x, len});
    auto& v = reflectors[j];
    if (xnorm == 0.0) continue;
    const double alpha = x[0] >= 0.0 ? -xnorm : xnorm;
    v.assign(x, x + len);
    v[0] -= alpha;
    const double vv = col_dot(v.data(), v.data(), len);
    if (vv == 0.0) {
      v.clear();
      continue;
    }
    for (std::size_t c = j; c < n; ++c) {
      double* y = a.col(c) + j;
      const double f = 2.0 * col_dot(v.data(), y, len) / vv;
      for (std::size_t i = 0; i < len; ++i) y[i] -= f * v[i];
    }
    // Exact zeros below the diagonal.
    x[0] = alpha;
    std::fill(x + 1, x + len, 0.0);
  }
  q = ColMajor(m, n);
  for (std::size_t c = 0; c < n; ++c) q.col(c)[c] = 1.0;
  for (std::size_t jj = n; jj-- > 0;) {
    const auto& v = reflectors[jj];
    if (v.empty()) continue;
    const std::size_t len = m - jj;
    const double vv = col_dot(v.data(), v.data(), len);
    for (std::size_t c = 0; c < n; ++c) {
      double* y = q.col(c) + jj;
      const double f = 2.0 * col_dot(v.data(), y, len) / vv;
      if (f == 0.0) continue;
      for (std::size_t i = 0; i < len; ++i) y[i] -= f * v[i];
    }
  }
}

// One-sided Jacobi on a square column-major matrix `w`: rotates column
// pairs until every pair is orthogonal to working precision. The rotations
// accumulate into `v`. Returns the number of sweeps used.
std::size_t hestenes_jacobi(ColMajor& w, ColMajor& v) {
  const std::size_t n = w.cols;
  const std::size_t len = w.rows;
  const double tol = static_cast<double>(std::max<std::size_t>(len, 1)) * DBL_EPSILON;
  for (std::size_t sweep = 1; sweep <= kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double* wp = w.col(p);
        double* wq = w.col(q);
        const double alpha = col_dot(wp, wp, len);
        const double beta = col_dot(wq, wq, len);
        const double gamma = col_dot(wp, wq, len);
        if (alpha == 0.0 || beta == 0.0) continue;
        if (std::abs(gamma) <= tol * std::sqrt(alpha) * std::sqrt(beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < len; ++i) {
          const double a = wp[i];
          const double b = wq[i];
          wp[i] = c * a - s * b;
          wq[i] = s * a + c * b;
        }
        double* vp = v.col(p);
        double* vq = v.col(q);
        for (std::size_t i = 0; i < v.rows; ++i) {
          const double a = vp[i];
          const double b = vq[i];
          vp[i] = c * a - s * b;
          vq[i] = s * a + c * b;
        }
      }
    }
    if (!rotated) return sweep;
  }
  throw Error::numerical(kMaxSweeps, "one-sided Jacobi SVD did not converge within " + std::to_string(kMaxSweeps) +
                                         " sweeps");
}

// SVD of a tall column-major matrix (rows ≥ cols ≥ 1), unoriented.
Factorization tall_svd(ColMajor a) {
  const std::size_t m = a.rows;
  const std::size_t n = a.cols;
  ColMajor q(0, 0);
  householder_qr(a, q);

  ColMajor r(n, n);
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t i = 0; i <= c; ++i) r.col(c)[i] = a.col(c)[i];

  ColMajor vr(n, n);
  for (std::size_t c = 0; c < n; ++c) vr.col(c)[c] = 1.0;
  hestenes_jacobi(r, vr);

  std::vector<double> norms(n);
  for (std::size_t c = 0; c < n; ++c) norms[c] = norm2({r.col(c), n});
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return norms[x] > norms[y]; });

  const double smax = norms[order.front()];
  const double negligible = std::max(smax * static_cast<double>(n) * DBL_EPSILON, DBL_MIN);

  Factorization f{ColMajor(m, n), std::vector<double>(n), ColMajor(n, n)};
  ColMajor ur(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t src = order[j];
    f.sigma[j] = norms[src];
    std::copy(vr.col(src), vr.col(src) + n, f.v.col(j));
    double* dst = ur.col(j);
    if (norms[src] > negligible) {
      for (std::size_t i = 0; i < n; ++i) dst[i] = r.col(src)[i] / norms[src];
      continue;
    }
    // Null-space direction: complete the basis from the first canonical
    // vector that survives two rounds of Gram-Schmidt.
    for (std::size_t e = 0; e < n; ++e) {
      std::fill(dst, dst + n, 0.0);
      dst[e] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t k = 0; k < j; ++k) {
          const double proj = col_dot(ur.col(k), dst, n);
          for (std::size_t i = 0; i < n; ++i) dst[i] -= proj * ur.col(k)[i];
        }
      }
      const double len = norm2({dst, n});
      if (len > 0.5) {
        for (std::size_t i = 0; i < n; ++i) dst[i] /= len;
        break;
      }
    }
  }

  // U = Q · U_R
  for (std::size_t j = 0; j < n; ++j) {
    double* dst = f.u.col(j);
    for (std::size_t l = 0; l < n; ++l) {
      const double s = ur.col(j)[l];
      if (s == 0.0) continue;
      const double* ql = q.col(l);
      for (std::size_t i = 0; i < m; ++i) dst[i] += s * ql[i];
    }
  }
  return f;
}

Matrix to_row_major(const ColMajor& c) {
  Matrix out(c.rows, c.cols);
  for (std::size_t j = 0; j < c.cols; ++j)
    for (std::size_t i = 0; i < c.rows; ++i) out(i, j) = c.col(j)[i];
  return out;
}

}  // namespace

void orient_columns(Matrix& v, Matrix* u) {
  for (std::size_t j = 0; j < v.cols(); ++j) {
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < v.rows(); ++i) {
      const double a = std::abs(v(i, j));
      if (a > best) {
        best = a;
        arg = i;
      }
    }
    if (v.rows() == 0 || v(arg, j) >= 0.0) continue;
    for (std::size_t i = 0; i < v.rows(); ++i) v(i, j) = -v(i, j);
    if (u != nullptr) {
      for (std::size_t i = 0; i < u->rows(); ++i) (*u)(i, j) = -(*u)(i, j);
    }
  }
}

SvdResult svd(const Matrix& m) {
  if (m.rows() == 0 || m.cols() == 0) throw Error(ErrorCode::kInvalidMatrix, "svd of an empty matrix");
  if (!m.all_finite()) throw Error(ErrorCode::kInvalidMatrix, "svd input has non-finite entries");

  const bool wide = m.rows() < m.cols();
  const std::size_t tall_rows = wide ? m.cols() : m.rows();
  const std::size_t tall_cols = wide ? m.rows() : m.cols();
  ColMajor a(tall_rows, tall_cols);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (wide) {
        a.col(i)[j] = m(i, j);
      } else {
        a.col(j)[i] = m(i, j);
      }
    }

  Factorization f = tall_svd(std::move(a));
  SvdResult out;
  out.sigma = std::move(f.sigma);
  if (wide) {
    out.u = to_row_major(f.v);
    out.v = to_row_major(f.u);
  } else {
    out.u = to_row_major(f.u);
    out.v = to_row_major(f.v);
  }
  orient_columns(out.v, &out.u);
  return out;
}

namespace {

void check_basis_dim(std::span<const double> v, const Matrix& basis) {
  if (v.size() != basis.rows()) {
    throw Error(ErrorCode::kDimensionError, "vector has dimension " + std::to_string(v.size()) + ", basis " +
                                                std::to_string(basis.rows()));
  }
}

std::vector<double> coefficients(std::span<const double> v, const Matrix& basis) {
  std::vector<double> coef(basis.cols(), 0.0);
  for (std::size_t i = 0; i < basis.rows(); ++i) {
    const auto b = basis.row(i);
    for (std::size_t j = 0; j < basis.cols(); ++j) coef[j] += b[j] * v[i];
  }
  return coef;
}

std::vector<double> subtract_combination(std::span<const double> v, const Matrix& basis,
                                         const std::vector<double>& coef) {
  std::vector<double> out(v.begin(), v.end());
  for (std::size_t i = 0; i < basis.rows(); ++i) {
    const auto b = basis.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < basis.cols(); ++j) s += b[j] * coef[j];
    out[i] -= s;
  }
  return out;
}

}  // namespace

std::vector<double> project_out(std::span<const double> v, const Matrix& basis) {
  check_basis_dim(v, basis);
  if (basis.cols() == 0) return {v.begin(), v.end()};
  return subtract_combination(v, basis, coefficients(v, basis));
}

std::vector<double> project_out_scaled(std::span<const double> v, const Matrix& basis) {
  check_basis_dim(v, basis);
  const double len = norm2(v);
  if (len == 0.0) throw Error(ErrorCode::kZeroVector, "removal formula divides by ‖v‖ = 0");
  if (basis.cols() == 0) return {v.begin(), v.end()};
  auto coef = coefficients(v, basis);
  for (double& c : coef) c /= len;
  return subtract_combination(v, basis, coef);
}

Matrix pca_project(const Matrix& m, std::size_t k) {
  if (m.rows() < 2) throw Error(ErrorCode::kRankError, "PCA needs at least 2 rows");
  const std::size_t kmax = std::min(m.rows(), m.cols());
  if (k < 1 || k > kmax) {
    throw Error(ErrorCode::kRankError, "k = " + std::to_string(k) + " outside [1, " + std::to_string(kmax) + "]");
  }
  Matrix centered = m;
  for (std::size_t j = 0; j < m.cols(); ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) mean += m(i, j);
    mean /= static_cast<double>(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) centered(i, j) -= mean;
  }
  const SvdResult f = svd(centered);
  Matrix scores(m.rows(), k);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < k; ++j) scores(i, j) = f.u(i, j) * f.sigma[j];
  return scores;
}

}  // namespace linalg
}  // namespace lir
