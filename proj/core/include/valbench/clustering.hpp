#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "valbench/kernels.hpp"

namespace valbench {

struct KMeansOptions {
  int restarts = 10;
  int max_iterations = 300;
  double relative_tolerance = 1e-4;  // stop when inertia improves by less than this fraction
};

struct ClusterAssignment {
  std::vector<std::uint32_t> labels;
  Matrix centroids;  // k x D
  double inertia = 0.0;
  int iterations = 0;
  int restart = 0;  // restart index that produced this result
  std::vector<double> inertia_trace;  // inertia after each assignment step of the winning restart
};

/// k-means++ seeding followed by Lloyd iterations, best of `restarts` by
/// inertia (lowest restart index wins ties). Deterministic for a fixed seed.
ClusterAssignment kmeans(const Matrix& points, std::size_t k, std::uint64_t seed,
                         const KMeansOptions& options = {});

/// Adjusted mutual information with arithmetic-mean normalization and exact
/// expected MI under the hypergeometric model. Returns 0 when the normalizer
/// vanishes.
double adjusted_mutual_information(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b);

/// Mean silhouette coefficient with Euclidean distance. Singleton clusters
/// contribute 0. Throws DegenerateInput with fewer than two distinct labels.
double silhouette_score(const Matrix& points, std::span<const std::uint32_t> labels);

}  // namespace valbench
