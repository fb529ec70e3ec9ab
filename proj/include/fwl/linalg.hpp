#pragma once

#include <cmath>

#include "fwl/errors.hpp"
#include "fwl/vecmat.hpp"

namespace fwl {

/// Cholesky factorization A = L L^T for a symmetric positive-definite A.
/// `jitter` is added to the diagonal before factoring; kernel Gram matrices
/// without a White term can be numerically semidefinite.
/// Throws NotPositiveDefinite when a pivot falls to or below zero.
inline Matrix cholesky(const Matrix& a, double jitter = 0.0) {
  if (a.rows() != a.cols()) throw DimensionMismatch("cholesky: matrix not square");
  const std::size_t n = a.rows();
  Matrix l(n, n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double diag = a(j, j) + jitter;
    for (std::size_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
    if (!(diag > 0.0) || !std::isfinite(diag))
      throw NotPositiveDefinite("cholesky: non-positive pivot at row " + std::to_string(j));
    const double ljj = std::sqrt(diag);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return l;
}

/// Solve L y = b by forward substitution (L lower-triangular).
inline Vector solve_lower(const Matrix& l, const Vector& b) {
  if (l.rows() != l.cols() || b.size() != l.rows())
    throw DimensionMismatch("solve_lower: dimension mismatch");
  const std::size_t n = l.rows();
  Vector y(b);
  for (std::size_t i = 0; i < n; ++i) {
    double s = y[i];
    const double* row = l.row_ptr(i);
    for (std::size_t k = 0; k < i; ++k) s -= row[k] * y[k];
    y[i] = s / row[i];
  }
  return y;
}

/// Solve L^T x = y by back substitution.
inline Vector solve_upper_from_lower(const Matrix& l, const Vector& y) {
  if (l.rows() != l.cols() || y.size() != l.rows())
    throw DimensionMismatch("solve_upper_from_lower: dimension mismatch");
  const std::size_t n = l.rows();
  Vector x(y);
  for (std::size_t i = n; i-- > 0;) {
    double s = x[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= l(k, i) * x[k];
    x[i] = s / l(i, i);
  }
  return x;
}

/// Solve (L L^T) x = b given the Cholesky factor L.
inline Vector cho_solve(const Matrix& l, const Vector& b) {
  return solve_upper_from_lower(l, solve_lower(l, b));
}

}  // namespace fwl
