#pragma once

#include <limits>
#include <vector>

#include "fwl/rng.hpp"
#include "fwl/vecmat.hpp"

namespace fwl {

struct KmeansResult {
  Matrix centroids;                    // k x d
  std::vector<std::size_t> assignment; // one cluster index per point
  std::vector<double> sse_trace;       // within-cluster SSE after each assignment pass
};

namespace detail {

inline std::size_t nearest_row(const Matrix& centroids, const double* x, std::size_t d) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.rows(); ++c) {
    const double dist = squared_distance(centroids.row_ptr(c), x, d);
    if (dist < best_d) {  // ties keep the lowest index
      best_d = dist;
      best = c;
    }
  }
  return best;
}

}  // namespace detail

/// Lloyd's algorithm. Centroids are initialized from k distinct input rows
/// drawn via `rng`; iteration stops at an assignment fixed point or after
/// `max_iters` passes. An empty cluster is re-seeded with the point farthest
/// from its assigned centroid, so no cluster ends up empty.
inline KmeansResult kmeans(const Matrix& points, std::size_t k, Rng& rng,
                           std::size_t max_iters = 300) {
  const std::size_t n = points.rows();
  const std::size_t d = points.cols();
  if (k == 0 || k > n) throw KTooLarge("kmeans: need 1 <= k <= n");

  KmeansResult res;
  res.centroids = Matrix(k, d);
  const auto seeds = rng.sample_without_replacement(n, k);
  for (std::size_t c = 0; c < k; ++c)
    for (std::size_t j = 0; j < d; ++j) res.centroids(c, j) = points(seeds[c], j);

  res.assignment.assign(n, 0);
  std::vector<std::size_t> prev(n, k);  // k = "unassigned" sentinel
  std::vector<std::size_t> counts(k, 0);

  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    for (std::size_t i = 0; i < n; ++i)
      res.assignment[i] = detail::nearest_row(res.centroids, points.row_ptr(i), d);

    counts.assign(k, 0);
    for (std::size_t i = 0; i < n; ++i) ++counts[res.assignment[i]];

    // Re-seed empty clusters with the farthest point (skipping points that
    // are the sole member of their cluster, which would just move the hole).
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      std::size_t far_i = n;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[res.assignment[i]] <= 1) continue;
        const double dist =
            squared_distance(res.centroids.row_ptr(res.assignment[i]), points.row_ptr(i), d);
        if (dist > far_d) {
          far_d = dist;
          far_i = i;
        }
      }
      for (std::size_t j = 0; j < d; ++j) res.centroids(c, j) = points(far_i, j);
      --counts[res.assignment[far_i]];
      res.assignment[far_i] = c;
      ++counts[c];
    }

    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      sse += squared_distance(res.centroids.row_ptr(res.assignment[i]), points.row_ptr(i), d);
    res.sse_trace.push_back(sse);

    if (res.assignment == prev) break;
    prev = res.assignment;

    Matrix sums(k, d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double* srow = sums.row_ptr(res.assignment[i]);
      const double* p = points.row_ptr(i);
      for (std::size_t j = 0; j < d; ++j) srow[j] += p[j];
    }
    for (std::size_t c = 0; c < k; ++c)
      for (std::size_t j = 0; j < d; ++j)
        res.centroids(c, j) = sums(c, j) / static_cast<double>(counts[c]);
  }
  return res;
}

}  // namespace fwl
