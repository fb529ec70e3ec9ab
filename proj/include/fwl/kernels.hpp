#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "fwl/errors.hpp"
#include "fwl/vecmat.hpp"

namespace fwl {

enum class KernelKind { RBF, Matern32, Linear, White };

inline const char* kernel_kind_name(KernelKind k) {
  switch (k) {
    case KernelKind::RBF: return "RBF";
    case KernelKind::Matern32: return "Matern32";
    case KernelKind::Linear: return "Linear";
    case KernelKind::White: return "White";
  }
  return "?";
}

struct KernelTerm {
  KernelKind kind = KernelKind::RBF;
  double length_scale = 1.0;  // RBF / Matern32
  double sigma0 = 0.0;        // Linear
  double noise_level = 0.0;   // White

  static KernelTerm rbf(double l = 1.0) { return {KernelKind::RBF, l, 0.0, 0.0}; }
  static KernelTerm matern32(double l = 1.0) { return {KernelKind::Matern32, l, 0.0, 0.0}; }
  static KernelTerm linear(double sigma0 = 0.0) { return {KernelKind::Linear, 1.0, sigma0, 0.0}; }
  static KernelTerm white(double noise) { return {KernelKind::White, 1.0, 0.0, noise}; }
};

/// Sum of kernel terms. The White term models observation noise: it enters
/// only the diagonal of the training Gram matrix, never the cross-covariance
/// or the prior variance at query points.
struct KernelSpec {
  std::vector<KernelTerm> terms;

  void validate() const {
    bool non_white = false;
    for (const auto& t : terms) {
      if (t.kind != KernelKind::White) non_white = true;
      if ((t.kind == KernelKind::RBF || t.kind == KernelKind::Matern32) && !(t.length_scale > 0.0))
        throw ConfigParse("KernelSpec: length_scale must be > 0");
      if (t.kind == KernelKind::White && t.noise_level < 0.0)
        throw ConfigParse("KernelSpec: noise_level must be >= 0");
    }
    if (!non_white) throw ConfigParse("KernelSpec: needs at least one non-White term");
  }

  /// RBF(l=1) + White(noise); the default teacher covariance.
  static KernelSpec rbf_white(double l = 1.0, double noise = 0.01) {
    return {{KernelTerm::rbf(l), KernelTerm::white(noise)}};
  }
};

/// Evaluate the kernel sum at (x1, x2). `training_pair` marks a diagonal
/// entry of the training Gram matrix, i.e. x1 and x2 are the same training
/// row; only then does the White term contribute its noise level.
inline double kernel_eval(const KernelSpec& spec, const Vector& x1, const Vector& x2,
                          bool training_pair = false) {
  if (x1.size() != x2.size()) throw DimensionMismatch("kernel_eval: dimension mismatch");
  double sum = 0.0;
  for (const auto& t : spec.terms) {
    switch (t.kind) {
      case KernelKind::RBF: {
        const double d2 = squared_distance(x1, x2);
        sum += std::exp(-d2 / (2.0 * t.length_scale * t.length_scale));
        break;
      }
      case KernelKind::Matern32: {
        const double r = std::sqrt(squared_distance(x1, x2));
        const double a = std::sqrt(3.0) * r / t.length_scale;
        sum += (1.0 + a) * std::exp(-a);
        break;
      }
      case KernelKind::Linear:
        sum += t.sigma0 * t.sigma0 + dot(x1, x2);
        break;
      case KernelKind::White:
        if (training_pair) sum += t.noise_level;
        break;
    }
  }
  return sum;
}

}  // namespace fwl
