#pragma once

#include <cmath>
#include <numbers>
#include <utility>

#include "fwl/dataset.hpp"
#include "fwl/gp.hpp"
#include "fwl/rng.hpp"

namespace fwl {

/// The target function of the 1-d toy task.
inline double toy_true(double x) { return std::sin(x); }

/// The toy weak annotator: 2 sinc(x) with the unnormalized sinc = sin(x)/x
/// and the removable singularity filled in at 0.
inline double toy_weak(double x) {
  if (std::abs(x) < 1e-12) return 2.0;
  return 2.0 * std::sin(x) / x;
}

/// Probability that the first of two non-negative relevance scores wins.
/// Computed so that pairwise_preference(a,b) + pairwise_preference(b,a)
/// sums to 1.0 exactly in floating point.
inline double pairwise_preference(double score_pos, double score_neg) {
  if (score_pos < 0.0 || score_neg < 0.0) throw NegativeInput("pairwise_preference: negative score");
  if (score_pos == 0.0 && score_neg == 0.0) throw BothZero("pairwise_preference: both scores zero");
  const double total = score_pos + score_neg;
  return score_pos <= score_neg ? score_pos / total : 1.0 - score_neg / total;
}

enum class AnnotatorKind { ToySinc, Affine, LinearHeuristic, Centroid };

/// A cheap labeling heuristic. ToySinc and Affine are scalar regression
/// annotators; LinearHeuristic emits class-probability vectors from a linear
/// score; Centroid scores blob prototypes (softmax over squared distances)
/// and sums the mass per class. Both classifiers support label noise.
struct AnnotatorSpec {
  AnnotatorKind kind = AnnotatorKind::ToySinc;
  double amplitude = 2.0;                    // ToySinc
  double slope = 1.0, intercept = 1.0;       // Affine
  Matrix weights;                            // LinearHeuristic: classes x (d+1), last col bias
  Matrix prototypes;                         // Centroid: blobs x d
  std::vector<std::size_t> prototype_class;  // Centroid: blob -> class
  double temperature = 1.0;                  // classifier score scaling
  double noise_rate = 0.0;                   // probability of flipping label mass

  void validate() const {
    if (noise_rate < 0.0 || noise_rate > 1.0)
      throw ConfigParse("AnnotatorSpec: noise_rate must be in [0,1]");
    if (!std::isfinite(amplitude) || !std::isfinite(slope) || !std::isfinite(intercept) ||
        !std::isfinite(temperature) || !weights.all_finite() || !prototypes.all_finite())
      throw NonFiniteValue("AnnotatorSpec: non-finite parameter");
    if (kind == AnnotatorKind::Centroid && prototype_class.size() != prototypes.rows())
      throw DimensionMismatch("AnnotatorSpec: prototype_class/prototypes mismatch");
  }

  static AnnotatorSpec toy_sinc(double amplitude = 2.0) {
    AnnotatorSpec s;
    s.kind = AnnotatorKind::ToySinc;
    s.amplitude = amplitude;
    return s;
  }
  static AnnotatorSpec affine(double slope, double intercept) {
    AnnotatorSpec s;
    s.kind = AnnotatorKind::Affine;
    s.slope = slope;
    s.intercept = intercept;
    return s;
  }
};

/// Scalar regression annotator output.
inline double annotate_value(const AnnotatorSpec& spec, double x) {
  switch (spec.kind) {
    case AnnotatorKind::ToySinc:
      return spec.amplitude * (std::abs(x) < 1e-12 ? 1.0 : std::sin(x) / x);
    case AnnotatorKind::Affine:
      return spec.slope * x + spec.intercept;
    case AnnotatorKind::LinearHeuristic:
      throw BadDimension("annotate_value: LinearHeuristic emits distributions");
  }
  return 0.0;
}

/// Class-probability vector for input x: softmax of the linear scores, with
/// probability noise_rate the whole vector is cyclically shifted by a random
/// offset (uniform over all offsets, so rate 1 is uniform in expectation).
inline Vector annotate_distribution(const AnnotatorSpec& spec, const Vector& x, Rng& rng) {
  if (spec.kind != AnnotatorKind::LinearHeuristic)
    throw BadDimension("annotate_distribution: needs a LinearHeuristic annotator");
  const std::size_t classes = spec.weights.rows();
  if (spec.weights.cols() != x.size() + 1)
    throw DimensionMismatch("annotate_distribution: weights/input mismatch");
  Vector scores(classes, 0.0);
  for (std::size_t c = 0; c < classes; ++c) {
    const double* w = spec.weights.row_ptr(c);
    double s = w[x.size()];
    for (std::size_t j = 0; j < x.size(); ++j) s += w[j] * x[j];
    scores[c] = s / spec.temperature;
  }
  Vector probs = softmax(scores);
  if (spec.noise_rate > 0.0 && rng.uniform() < spec.noise_rate) {
    const std::size_t shift = static_cast<std::size_t>(rng.uniform_index(classes));
    Vector shifted(classes);
    for (std::size_t c = 0; c < classes; ++c) shifted[(c + shift) % classes] = probs[c];
    probs = std::move(shifted);
  }
  return probs;
}

/// Sample x uniformly over [x_lo, x_hi]: weak labels from the annotator,
/// strong labels from the true function plus Gaussian observation noise.
inline std::pair<LabeledSet, LabeledSet> gen_toy_data(Rng& rng, std::size_t n_weak = 100,
                                                      std::size_t n_strong = 10,
                                                      double x_lo = -10.0, double x_hi = 10.0,
                                                      double strong_noise_sd = 0.1,
                                                      const AnnotatorSpec& annotator = AnnotatorSpec{}) {
  if (n_weak < 1 || n_strong < 1) throw EmptyDataset("gen_toy_data: need n_weak, n_strong >= 1");
  if (!(x_lo < x_hi)) throw EmptyRange("gen_toy_data: empty x range");
  annotator.validate();

  LabeledSet weak;
  weak.tier = FidelityTier::Weak;
  weak.inputs = Matrix(n_weak, 1);
  weak.labels = Matrix(n_weak, 1);
  for (std::size_t i = 0; i < n_weak; ++i) {
    const double x = rng.uniform(x_lo, x_hi);
    weak.inputs(i, 0) = x;
    weak.labels(i, 0) = annotate_value(annotator, x);
  }

  LabeledSet strong;
  strong.tier = FidelityTier::Strong;
  strong.inputs = Matrix(n_strong, 1);
  strong.labels = Matrix(n_strong, 1);
  for (std::size_t i = 0; i < n_strong; ++i) {
    const double x = rng.uniform(x_lo, x_hi);
    strong.inputs(i, 0) = x;
    strong.labels(i, 0) = toy_true(x) + rng.gaussian(0.0, strong_noise_sd);
  }
  return {std::move(weak), std::move(strong)};
}

/// Deterministic test grid on [x_lo, x_hi] labeled by the true function.
inline LabeledSet toy_test_grid(std::size_t n, double x_lo = -10.0, double x_hi = 10.0) {
  if (n < 2) throw EmptyDataset("toy_test_grid: need n >= 2");
  LabeledSet test;
  test.tier = FidelityTier::Strong;
  test.inputs = Matrix(n, 1);
  test.labels = Matrix(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = x_lo + (x_hi - x_lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    test.inputs(i, 0) = x;
    test.labels(i, 0) = toy_true(x);
  }
  return test;
}

/// Class centers on a circle of the given radius (2-d inputs).
inline Matrix class_centers(std::size_t classes, double radius = 2.0) {
  if (classes < 2) throw BadClassCount("class_centers: need >= 2 classes");
  Matrix centers(classes, 2);
  for (std::size_t c = 0; c < classes; ++c) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(c) / static_cast<double>(classes);
    centers(c, 0) = radius * std::cos(angle);
    centers(c, 1) = radius * std::sin(angle);
  }
  return centers;
}

/// Annotator scoring classes by the generative boundaries of the blob
/// centers (equal spherical covariances). A nonzero bias angle rotates the
/// perceived centers, giving the heuristic a systematic error on top of the
/// random label noise, the way a real cheap annotator is biased.
inline AnnotatorSpec blob_annotator(const Matrix& centers, double temperature = 1.0,
                                    double noise_rate = 0.0, double bias_angle = 0.0) {
  if (centers.cols() != 2) throw BadDimension("blob_annotator: expects 2-d centers");
  AnnotatorSpec spec;
  spec.kind = AnnotatorKind::LinearHeuristic;
  spec.temperature = temperature;
  spec.noise_rate = noise_rate;
  spec.weights = Matrix(centers.rows(), centers.cols() + 1);
  const double cos_a = std::cos(bias_angle), sin_a = std::sin(bias_angle);
  for (std::size_t c = 0; c < centers.rows(); ++c) {
    const double wx = cos_a * centers(c, 0) - sin_a * centers(c, 1);
    const double wy = sin_a * centers(c, 0) + cos_a * centers(c, 1);
    spec.weights(c, 0) = wx;
    spec.weights(c, 1) = wy;
    spec.weights(c, 2) = -0.5 * (wx * wx + wy * wy);
  }
  return spec;
}

struct ClassificationTask {
  LabeledSet weak;    // soft distribution labels from the annotator
  LabeledSet strong;  // one-hot true labels
  LabeledSet test;    // one-hot true labels
};

/// Gaussian blobs per class. Weak labels are the annotator's probability
/// vectors; strong and test labels are the true one-hot assignments.
inline ClassificationTask gen_classification_task(Rng& rng, std::size_t n_weak,
                                                  std::size_t n_strong, std::size_t n_test,
                                                  std::size_t classes, double blob_spread,
                                                  const AnnotatorSpec& annotator) {
  if (classes < 2) throw BadClassCount("gen_classification_task: need >= 2 classes");
  annotator.validate();
  const Matrix centers = class_centers(classes);

  auto sample_split = [&](std::size_t n, bool weak_labels) {
    LabeledSet set;
    set.tier = weak_labels ? FidelityTier::Weak : FidelityTier::Strong;
    set.inputs = Matrix(n, 2);
    set.labels = Matrix(n, classes, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t cls = static_cast<std::size_t>(rng.uniform_index(classes));
      Vector x(2);
      for (std::size_t j = 0; j < 2; ++j) x[j] = centers(cls, j) + rng.gaussian(0.0, blob_spread);
      set.inputs.set_row(i, x);
      if (weak_labels) {
        set.labels.set_row(i, annotate_distribution(annotator, x, rng));
      } else {
        set.labels(i, cls) = 1.0;
      }
    }
    return set;
  };

  ClassificationTask task;
  task.weak = sample_split(n_weak, true);
  task.strong = sample_split(n_strong, false);
  task.test = sample_split(n_test, false);
  return task;
}

}  // namespace fwl
