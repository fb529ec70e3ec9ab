#pragma once

#include <cmath>
#include <utility>

#include "fwl/kernels.hpp"
#include "fwl/linalg.hpp"

namespace fwl {

enum class Task { Regression, Classification };

/// Exact GP regression state: training data plus the Cholesky factor of the
/// Gram matrix and alpha = K^-1 y. Multi-output targets are handled as
/// independent regressions sharing one factorization, so predictions are
/// reproducible from the stored state alone.
struct GpModel {
  KernelSpec kernel;
  Matrix train_inputs;   // n x d
  Matrix train_targets;  // n x p
  Matrix chol_factor;    // n x n, lower
  Matrix alpha;          // n x p
  double jitter = 1e-8;

  std::size_t input_dim() const { return train_inputs.cols(); }
  std::size_t output_dim() const { return train_targets.cols(); }
};

inline GpModel gp_fit(const KernelSpec& kernel, const Matrix& inputs, const Matrix& targets,
                      double jitter = 1e-8) {
  kernel.validate();
  const std::size_t n = inputs.rows();
  if (n == 0) throw EmptyTrainingSet("gp_fit: no training samples");
  if (targets.rows() != n) throw DimensionMismatch("gp_fit: inputs/targets row mismatch");
  if (!inputs.all_finite() || !targets.all_finite())
    throw NonFiniteValue("gp_fit: non-finite training data");

  Matrix gram(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vector xi = inputs.row(i);
    for (std::size_t j = 0; j <= i; ++j) {
      const double v = kernel_eval(kernel, xi, inputs.row(j), i == j);
      gram(i, j) = v;
      gram(j, i) = v;
    }
  }

  GpModel model;
  model.kernel = kernel;
  model.train_inputs = inputs;
  model.train_targets = targets;
  model.jitter = jitter;
  model.chol_factor = cholesky(gram, jitter);

  const std::size_t p = targets.cols();
  model.alpha = Matrix(n, p);
  Vector col(n);
  for (std::size_t c = 0; c < p; ++c) {
    for (std::size_t i = 0; i < n; ++i) col[i] = targets(i, c);
    const Vector a = cho_solve(model.chol_factor, col);
    for (std::size_t i = 0; i < n; ++i) model.alpha(i, c) = a[i];
  }
  return model;
}

/// Posterior mean and variance at x. mean = k*^T alpha per output dimension;
/// variance = k(x,x) - k*^T K^-1 k*, clamped at 0. k* and k(x,x) exclude the
/// White term (observation noise is not part of the latent function).
inline std::pair<Vector, double> gp_predict(const GpModel& model, const Vector& x) {
  const std::size_t n = model.train_inputs.rows();
  if (x.size() != model.input_dim()) throw DimensionMismatch("gp_predict: dimension mismatch");

  Vector kstar(n);
  for (std::size_t i = 0; i < n; ++i)
    kstar[i] = kernel_eval(model.kernel, x, model.train_inputs.row(i), false);

  const std::size_t p = model.output_dim();
  Vector mean(p, 0.0);
  for (std::size_t c = 0; c < p; ++c) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += kstar[i] * model.alpha(i, c);
    mean[c] = s;
  }

  const Vector w = solve_lower(model.chol_factor, kstar);
  const double prior = kernel_eval(model.kernel, x, x, false);
  double variance = prior - dot(w, w);
  if (variance < 0.0) variance = 0.0;
  return {std::move(mean), variance};
}

/// Teacher output after the task mappings: g(mean) as the soft label and
/// h(variances) as the scalar uncertainty input.
struct SoftPrediction {
  Vector soft_label;
  double confidence_input = 0.0;  // Sigma
};

inline Vector softmax(const Vector& z) {
  double zmax = z[0];
  for (double v : z) zmax = std::max(zmax, v);
  Vector out(z.size());
  double denom = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    out[i] = std::exp(z[i] - zmax);
    denom += out[i];
  }
  for (double& v : out) v /= denom;
  return out;
}

/// Regression: g and h are the identity (p = 1). Classification: g is the
/// softmax over the posterior mean, h the arithmetic mean of the
/// per-dimension variances.
inline SoftPrediction to_soft(const Vector& mean, const Vector& variance_vec, Task task) {
  if (mean.empty() || variance_vec.empty()) throw BadDimension("to_soft: empty prediction");
  if (task == Task::Regression) {
    if (mean.size() != 1) throw BadDimension("to_soft: regression expects 1 output dim");
    return {mean, variance_vec[0]};
  }
  if (mean.size() < 2) throw BadDimension("to_soft: classification expects >= 2 classes");
  double sigma = 0.0;
  for (double v : variance_vec) sigma += v;
  sigma /= static_cast<double>(variance_vec.size());
  return {softmax(mean), sigma};
}

}  // namespace fwl
