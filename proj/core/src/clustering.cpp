#include "valbench/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <string>

#include "valbench/error.hpp"

namespace valbench {

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

Matrix kmeans_plus_plus(const Matrix& points, std::size_t k, std::mt19937_64& rng) {
  const std::size_t n = points.rows;
  Matrix centroids(k, points.cols);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  auto set_centroid = [&](std::size_t c, std::size_t point) {
    const auto src = points.row(point);
    std::copy(src.begin(), src.end(), centroids.row(c).begin());
  };

  set_centroid(0, pick(rng));
  std::vector<double> nearest(n);
  for (std::size_t i = 0; i < n; ++i) nearest[i] = squared_distance(points.row(i), centroids.row(0));

  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (double d : nearest) total += d;
    std::size_t chosen = 0;
    if (total > 0.0) {
      const double target = unit(rng) * total;
      double acc = 0.0;
      chosen = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += nearest[i];
        if (acc > target && nearest[i] > 0.0) {
          chosen = i;
          break;
        }
      }
    } else {
      chosen = pick(rng);
    }
    set_centroid(c, chosen);
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], squared_distance(points.row(i), centroids.row(c)));
    }
  }
  return centroids;
}

// Assigns each point to its nearest centroid (lowest index on ties); returns inertia.
double assign(const Matrix& points, const Matrix& centroids, std::vector<std::uint32_t>& labels,
              std::vector<double>& distances) {
  double inertia = 0.0;
  for (std::size_t i = 0; i < points.rows; ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::uint32_t best_c = 0;
    for (std::size_t c = 0; c < centroids.rows; ++c) {
      const double d = squared_distance(points.row(i), centroids.row(c));
      if (d < best) {
        best = d;
        best_c = static_cast<std::uint32_t>(c);
      }
    }
    labels[i] = best_c;
    distances[i] = best;
    inertia += best;
  }
  return inertia;
}

void update_centroids(const Matrix& points, const std::vector<std::uint32_t>& labels,
                      const std::vector<double>& distances, Matrix& centroids) {
  const std::size_t k = centroids.rows;
  std::vector<std::size_t> counts(k, 0);
  std::fill(centroids.data.begin(), centroids.data.end(), 0.0);
  for (std::size_t i = 0; i < points.rows; ++i) {
    const auto src = points.row(i);
    auto dst = centroids.row(labels[i]);
    for (std::size_t d = 0; d < src.size(); ++d) dst[d] += src[d];
    ++counts[labels[i]];
  }

  std::vector<bool> taken(points.rows, false);
  for (std::size_t c = 0; c < k; ++c) {
    auto dst = centroids.row(c);
    if (counts[c] > 0) {
      for (double& v : dst) v /= static_cast<double>(counts[c]);
      continue;
    }
    // Empty cluster: move it onto the point farthest from its own centroid.
    std::size_t far = 0;
    double far_d = -1.0;
    for (std::size_t i = 0; i < points.rows; ++i) {
      if (!taken[i] && distances[i] > far_d) {
        far_d = distances[i];
        far = i;
      }
    }
    taken[far] = true;
    const auto src = points.row(far);
    std::copy(src.begin(), src.end(), dst.begin());
  }
}

}  // namespace

ClusterAssignment kmeans(const Matrix& points, std::size_t k, std::uint64_t seed,
                         const KMeansOptions& options) {
  const std::size_t n = points.rows;
  if (n == 0 || k == 0 || points.cols == 0) {
    throw Error(ErrorKind::InvalidArgument, "kmeans needs N >= 1, k >= 1, D >= 1");
  }
  if (k > n) {
    throw Error(ErrorKind::InvalidArgument,
                "kmeans: k = " + std::to_string(k) + " exceeds N = " + std::to_string(n));
  }

  ClusterAssignment best;
  best.inertia = std::numeric_limits<double>::infinity();
  const int restarts = std::max(1, options.restarts);

  for (int restart = 0; restart < restarts; ++restart) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(restart)};
    std::mt19937_64 rng(seq);

    ClusterAssignment current;
    current.restart = restart;
    current.centroids = kmeans_plus_plus(points, k, rng);
    current.labels.assign(n, 0);
    std::vector<double> distances(n);
    std::vector<std::uint32_t> previous;

    for (int iter = 0; iter < options.max_iterations; ++iter) {
      const double inertia = assign(points, current.centroids, current.labels, distances);
      current.inertia_trace.push_back(inertia);
      current.inertia = inertia;
      current.iterations = iter + 1;
      if (iter > 0) {
        const double prev = current.inertia_trace[current.inertia_trace.size() - 2];
        if (current.labels == previous) break;
        if (prev - inertia <= options.relative_tolerance * prev) break;
      }
      if (iter + 1 == options.max_iterations) break;
      previous = current.labels;
      update_centroids(points, current.labels, distances, current.centroids);
    }

    if (current.inertia < best.inertia) best = std::move(current);
  }
  return best;
}

double adjusted_mutual_information(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::InvalidArgument, "AMI: label vectors differ in length");
  }
  if (a.empty()) throw Error(ErrorKind::InvalidArgument, "AMI: empty label vectors");
  const std::size_t n = a.size();

  std::map<std::uint32_t, std::size_t> a_ids, b_ids;
  for (auto v : a) a_ids.emplace(v, a_ids.size());
  for (auto v : b) b_ids.emplace(v, b_ids.size());
  const std::size_t ra = a_ids.size(), rb = b_ids.size();

  std::vector<double> table(ra * rb, 0.0), a_sum(ra, 0.0), b_sum(rb, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t ia = a_ids[a[i]], ib = b_ids[b[i]];
    table[ia * rb + ib] += 1.0;
    a_sum[ia] += 1.0;
    b_sum[ib] += 1.0;
  }

  const double total = static_cast<double>(n);
  const double log_n = std::log(total);
  auto entropy = [&](const std::vector<double>& counts) {
    double h = 0.0;
    for (double c : counts) h -= (c / total) * (std::log(c) - log_n);
    return h;
  };
  const double h_a = entropy(a_sum);
  const double h_b = entropy(b_sum);

  double mi = 0.0;
  for (std::size_t i = 0; i < ra; ++i)
    for (std::size_t j = 0; j < rb; ++j) {
      const double nij = table[i * rb + j];
      if (nij > 0.0) mi += (nij / total) * (log_n + std::log(nij) - std::log(a_sum[i]) - std::log(b_sum[j]));
    }

  // Expected MI under random permutations with fixed marginals.
  const double lg_n = std::lgamma(total + 1.0);
  double emi = 0.0;
  for (std::size_t i = 0; i < ra; ++i) {
    const double ai = a_sum[i];
    for (std::size_t j = 0; j < rb; ++j) {
      const double bj = b_sum[j];
      const double lo = std::max(1.0, ai + bj - total);
      const double hi = std::min(ai, bj);
      const double fixed = std::lgamma(ai + 1.0) + std::lgamma(bj + 1.0) + std::lgamma(total - ai + 1.0) +
                           std::lgamma(total - bj + 1.0) - lg_n;
      for (double nij = lo; nij <= hi; nij += 1.0) {
        const double log_p = fixed - std::lgamma(nij + 1.0) - std::lgamma(ai - nij + 1.0) -
                             std::lgamma(bj - nij + 1.0) - std::lgamma(total - ai - bj + nij + 1.0);
        const double term = (nij / total) * (log_n + std::log(nij) - std::log(ai) - std::log(bj));
        emi += term * std::exp(log_p);
      }
    }
  }

  const double denom = 0.5 * (h_a + h_b) - emi;
  if (std::abs(denom) < 1e-15) return 0.0;
  return (mi - emi) / denom;
}

double silhouette_score(const Matrix& points, std::span<const std::uint32_t> labels) {
  const std::size_t n = points.rows;
  if (labels.size() != n) throw Error(ErrorKind::InvalidArgument, "silhouette: label count != point count");

  std::map<std::uint32_t, std::size_t> ids;
  for (auto v : labels) ids.emplace(v, ids.size());
  const std::size_t k = ids.size();
  if (k < 2) throw Error(ErrorKind::DegenerateInput, "silhouette needs at least two non-empty clusters");

  std::vector<std::size_t> compact(n), counts(k, 0);
  for (std::size_t i = 0; i < n; ++i) {
    compact[i] = ids[labels[i]];
    ++counts[compact[i]];
  }

  Matrix sums(n, k);
  for (std::size_t i = 0; i < n; ++i) {
    const auto pi = points.row(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = std::sqrt(squared_distance(pi, points.row(j)));
      sums(i, compact[j]) += d;
      sums(j, compact[i]) += d;
    }
  }

  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t own = compact[i];
    if (counts[own] <= 1) continue;
    const double intra = sums(i, own) / static_cast<double>(counts[own] - 1);
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      if (c != own) nearest = std::min(nearest, sums(i, c) / static_cast<double>(counts[c]));
    }
    const double scale = std::max(intra, nearest);
    if (scale > 0.0) total += (nearest - intra) / scale;
  }
  return total / static_cast<double>(n);
}

}  // namespace valbench
