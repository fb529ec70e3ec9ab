#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <vector>

#include "fwl/errors.hpp"

namespace fwl {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles. Deliberately minimal: just what the
/// GP solves, the student network and the dataset containers need.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_)
      throw DimensionMismatch("Matrix: data length != rows*cols");
  }
  Matrix(std::initializer_list<std::initializer_list<double>> init) {
    rows_ = init.size();
    cols_ = rows_ ? init.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& row : init) {
      if (row.size() != cols_)
        throw DimensionMismatch("Matrix: ragged initializer");
      data_.insert(data_.end(), row.begin(), row.end());
    }
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  double* row_ptr(std::size_t i) { return data_.data() + i * cols_; }
  const double* row_ptr(std::size_t i) const { return data_.data() + i * cols_; }

  Vector row(std::size_t i) const {
    return Vector(row_ptr(i), row_ptr(i) + cols_);
  }
  void set_row(std::size_t i, const Vector& v) {
    if (v.size() != cols_) throw DimensionMismatch("Matrix::set_row: length mismatch");
    std::copy(v.begin(), v.end(), row_ptr(i));
  }

  const std::vector<double>& storage() const { return data_; }
  std::vector<double>& storage() { return data_; }

  bool all_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline double dot(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw DimensionMismatch("dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double squared_distance(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

inline double squared_distance(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw DimensionMismatch("squared_distance: length mismatch");
  return squared_distance(a.data(), b.data(), a.size());
}

inline double norm2(const Vector& a) { return std::sqrt(dot(a, a)); }

inline bool all_finite(const Vector& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

/// y = M x  (M is rows x cols, x has length cols).
inline Vector matvec(const Matrix& m, const Vector& x) {
  if (x.size() != m.cols()) throw DimensionMismatch("matvec: dimension mismatch");
  Vector y(m.rows(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double* row = m.row_ptr(i);
    double s = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) s += row[j] * x[j];
    y[i] = s;
  }
  return y;
}

}  // namespace fwl
