#pragma once

#include <cmath>
#include <vector>

#include "fwl/errors.hpp"
#include "fwl/vecmat.hpp"

namespace fwl {

inline double rmse(const Matrix& predictions, const Matrix& targets) {
  if (predictions.rows() != targets.rows() || predictions.cols() != targets.cols())
    throw DimensionMismatch("rmse: shape mismatch");
  if (predictions.size() == 0) throw EmptyDataset("rmse: no samples");
  double s = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double d = predictions.data()[i] - targets.data()[i];
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(predictions.size()));
}

inline std::size_t argmax(const double* v, std::size_t n) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

inline std::size_t argmax(const Vector& v) { return argmax(v.data(), v.size()); }

/// Unweighted mean of per-class F1. A class with zero predicted or zero
/// actual positives contributes an F1 of 0.
inline double macro_f1(const std::vector<std::size_t>& predicted,
                       const std::vector<std::size_t>& actual, std::size_t classes) {
  if (predicted.size() != actual.size()) throw DimensionMismatch("macro_f1: length mismatch");
  if (predicted.empty()) throw EmptyDataset("macro_f1: no samples");
  std::vector<std::size_t> tp(classes, 0), fp(classes, 0), fn(classes, 0);
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i] == actual[i]) {
      ++tp[predicted[i]];
    } else {
      ++fp[predicted[i]];
      ++fn[actual[i]];
    }
  }
  double sum = 0.0;
  for (std::size_t c = 0; c < classes; ++c) {
    const double denom = static_cast<double>(2 * tp[c] + fp[c] + fn[c]);
    sum += denom > 0.0 ? 2.0 * static_cast<double>(tp[c]) / denom : 0.0;
  }
  return sum / static_cast<double>(classes);
}

inline double mean(const Vector& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

/// Sample standard deviation (n-1 denominator); 0 for fewer than 2 values.
inline double sample_sd(const Vector& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace fwl
