#pragma once

#include <utility>
#include <vector>

#include "fwl/gp.hpp"
#include "fwl/kmeans.hpp"

namespace fwl {

/// One GP per k-means cluster of the training inputs. Queries are routed to
/// the GP of the nearest centroid. With k = 1 this degenerates to a single
/// GP whose predictions are bit-identical to gp_fit/gp_predict.
struct ClusteredGp {
  Matrix centroids;                            // k x d
  std::vector<std::vector<std::size_t>> members;  // original row indices per cluster
  std::vector<GpModel> gps;

  std::size_t cluster_count() const { return gps.size(); }
  std::size_t input_dim() const { return centroids.cols(); }
  std::size_t output_dim() const { return gps.empty() ? 0 : gps.front().output_dim(); }
};

inline ClusteredGp clustered_fit(const KernelSpec& kernel, const Matrix& inputs,
                                 const Matrix& targets, std::size_t k, Rng& rng,
                                 double jitter = 1e-8) {
  const std::size_t n = inputs.rows();
  if (k > n) throw KTooLarge("clustered_fit: k > n");
  if (targets.rows() != n) throw DimensionMismatch("clustered_fit: inputs/targets row mismatch");

  const KmeansResult km = kmeans(inputs, k, rng);

  ClusteredGp model;
  model.centroids = km.centroids;
  model.members.assign(k, {});
  for (std::size_t i = 0; i < n; ++i) model.members[km.assignment[i]].push_back(i);

  const std::size_t d = inputs.cols();
  const std::size_t p = targets.cols();
  model.gps.reserve(k);
  for (std::size_t c = 0; c < k; ++c) {
    const auto& idx = model.members[c];
    Matrix in(idx.size(), d), tg(idx.size(), p);
    for (std::size_t r = 0; r < idx.size(); ++r) {
      for (std::size_t j = 0; j < d; ++j) in(r, j) = inputs(idx[r], j);
      for (std::size_t j = 0; j < p; ++j) tg(r, j) = targets(idx[r], j);
    }
    model.gps.push_back(gp_fit(kernel, in, tg, jitter));
  }
  return model;
}

inline std::pair<Vector, double> clustered_predict(const ClusteredGp& model, const Vector& x) {
  if (x.size() != model.input_dim()) throw DimensionMismatch("clustered_predict: dimension mismatch");
  const std::size_t c = detail::nearest_row(model.centroids, x.data(), x.size());
  return gp_predict(model.gps[c], x);
}

}  // namespace fwl
