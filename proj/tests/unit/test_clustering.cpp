#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "valbench/clustering.hpp"
#include "valbench/error.hpp"

using namespace valbench;

namespace {

// Gaussian blobs around well-separated centres; returns points and labels.
std::pair<Matrix, std::vector<std::uint32_t>> blobs(std::size_t per_blob, std::size_t k, double sd,
                                                    std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, sd);
  Matrix pts(per_blob * k, 2);
  std::vector<std::uint32_t> labels(per_blob * k);
  for (std::size_t i = 0; i < pts.rows; ++i) {
    const std::uint32_t c = static_cast<std::uint32_t>(i % k);
    labels[i] = c;
    pts(i, 0) = 10.0 * std::cos(2.0 * 3.14159265358979 * c / k) + noise(rng);
    pts(i, 1) = 10.0 * std::sin(2.0 * 3.14159265358979 * c / k) + noise(rng);
  }
  return {pts, labels};
}

// True when `a` equals `b` up to a relabeling of cluster ids.
bool same_partition(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j)
      if ((a[i] == a[j]) != (b[i] == b[j])) return false;
  return true;
}

}  // namespace

TEST(KMeans, TwoSeparatedPairs) {
  const Matrix pts(4, 1, {0.0, 1.0, 100.0, 103.0});
  const auto result = kmeans(pts, 2, 1);
  EXPECT_EQ(result.labels[0], result.labels[1]);
  EXPECT_EQ(result.labels[2], result.labels[3]);
  EXPECT_NE(result.labels[0], result.labels[2]);
  // Each point sits half the pair distance from its centroid.
  EXPECT_NEAR(result.inertia, 2 * 0.25 + 2 * 2.25, 1e-12);
}

TEST(KMeans, KEqualsNGivesZeroInertia) {
  std::mt19937_64 rng(1);
  const auto result = kmeans(fixtures::random_matrix(7, 3, rng), 7, 2);
  EXPECT_NEAR(result.inertia, 0.0, 1e-12);
}

TEST(KMeans, RecoversBlobs) {
  std::mt19937_64 rng(2);
  const auto [pts, labels] = blobs(40, 3, 0.3, rng);
  const auto result = kmeans(pts, 3, 3);
  EXPECT_TRUE(same_partition(result.labels, labels));
}

TEST(KMeans, InertiaNonIncreasingPerIteration) {
  std::mt19937_64 rng(3);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto result = kmeans(fixtures::random_matrix(200, 4, rng), 6, seed);
    ASSERT_FALSE(result.inertia_trace.empty());
    for (std::size_t i = 1; i < result.inertia_trace.size(); ++i)
      EXPECT_LE(result.inertia_trace[i], result.inertia_trace[i - 1] * (1 + 1e-12));
  }
}

TEST(KMeans, DeterministicForSeed) {
  std::mt19937_64 rng(4);
  const Matrix pts = fixtures::random_matrix(100, 3, rng);
  const auto a = kmeans(pts, 4, 9), b = kmeans(pts, 4, 9);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_EQ(a.inertia, b.inertia);
}

TEST(KMeans, DuplicatePointsDoNotLeaveEmptyClusters) {
  const Matrix pts(5, 1, {1.0, 1.0, 1.0, 1.0, 2.0});
  const auto result = kmeans(pts, 3, 5);
  EXPECT_EQ(result.labels.size(), 5u);
  EXPECT_TRUE(std::isfinite(result.inertia));
}

TEST(KMeans, TooManyClustersIsInvalid) {
  EXPECT_EQ(fixtures::error_kind([] { kmeans(Matrix(2, 1, {0.0, 1.0}), 3, 0); }), ErrorKind::InvalidArgument);
}

TEST(Ami, IdenticalLabelingsGiveOne) {
  const std::vector<std::uint32_t> a{0, 0, 1, 1, 2, 2, 2};
  EXPECT_NEAR(adjusted_mutual_information(a, a), 1.0, 1e-12);
}

TEST(Ami, MatchesPermutationEnumerationAtN8) {
  const std::vector<std::uint32_t> a{0, 0, 0, 1, 1, 1, 2, 2};
  const std::vector<std::uint32_t> b{0, 0, 1, 1, 1, 0, 1, 1};
  const std::vector<std::uint32_t> c{2, 0, 1, 1, 0, 2, 2, 0};
  EXPECT_NEAR(adjusted_mutual_information(a, b), oracle::ami_by_enumeration(a, b), 1e-12);
  EXPECT_NEAR(adjusted_mutual_information(a, c), oracle::ami_by_enumeration(a, c), 1e-12);
  EXPECT_NEAR(adjusted_mutual_information(b, c), oracle::ami_by_enumeration(b, c), 1e-12);
}

TEST(Ami, SymmetricAndPermutationInvariant) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::uint32_t> label(0, 3);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::uint32_t> a(40), b(40);
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = label(rng);
      b[i] = label(rng) ^ (a[i] & 1u);  // mildly dependent on a
    }
    std::array<std::uint32_t, 4> perm{2, 0, 3, 1};
    std::vector<std::uint32_t> a_perm(a.size());
    std::transform(a.begin(), a.end(), a_perm.begin(), [&](std::uint32_t x) { return perm[x]; });
    const double ab = adjusted_mutual_information(a, b);
    EXPECT_NEAR(ab, adjusted_mutual_information(b, a), 1e-12);
    EXPECT_NEAR(ab, adjusted_mutual_information(a_perm, b), 1e-12);
    EXPECT_NEAR(ab, adjusted_mutual_information(b, a_perm), 1e-12);
  }
}

TEST(Ami, SingleClusterCarriesNoInformation) {
  const std::vector<std::uint32_t> a{0, 1, 2, 0, 1, 2};
  const std::vector<std::uint32_t> one(6, 0);
  EXPECT_LE(adjusted_mutual_information(a, one), 1e-9);
}

TEST(Ami, IndependentLabelingsNearZero) {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<std::uint32_t> label(0, 9);
  double total = 0.0;
  for (int seed = 0; seed < 20; ++seed) {
    std::vector<std::uint32_t> a(2000), b(2000);
    for (auto& v : a) v = label(rng);
    for (auto& v : b) v = label(rng);
    total += adjusted_mutual_information(a, b);
  }
  EXPECT_LT(std::abs(total / 20), 0.05);
}

TEST(Silhouette, SeparatedClustersScoreHigh) {
  std::mt19937_64 rng(7);
  const auto [pts, labels] = blobs(30, 2, 0.1, rng);
  EXPECT_GT(silhouette_score(pts, labels), 0.9);
}

TEST(Silhouette, IdenticalPointsScoreZero) {
  const Matrix pts(4, 2, 1.5);
  const std::vector<std::uint32_t> labels{0, 1, 0, 1};
  EXPECT_EQ(silhouette_score(pts, labels), 0.0);
}

TEST(Silhouette, MatchesNaiveLoop) {
  const Matrix pts(6, 2, {0.0, 0.0, 0.5, 0.2, 0.1, 0.9, 4.0, 4.0, 4.5, 3.0, 2.0, 2.5});
  const std::vector<std::uint32_t> labels{0, 0, 1, 1, 1, 2};
  EXPECT_NEAR(silhouette_score(pts, labels), oracle::silhouette(fixtures::to_rows(pts), labels), 1e-12);
}

TEST(Silhouette, InvariantUnderTranslationAndRotation) {
  std::mt19937_64 rng(8);
  const auto [pts, labels] = blobs(15, 3, 2.0, rng);
  const double base = silhouette_score(pts, labels);
  Matrix moved = pts;
  const double ct = std::cos(0.7), st = std::sin(0.7);
  for (std::size_t i = 0; i < pts.rows; ++i) {
    moved(i, 0) = ct * pts(i, 0) - st * pts(i, 1) + 13.0;
    moved(i, 1) = st * pts(i, 0) + ct * pts(i, 1) - 4.0;
  }
  EXPECT_NEAR(silhouette_score(moved, labels), base, 1e-9);
}

TEST(Silhouette, SingleClusterIsDegenerate) {
  const std::vector<std::uint32_t> labels(3, 1);
  EXPECT_EQ(fixtures::error_kind([&] { silhouette_score(Matrix(3, 1, {0, 1, 2}), labels); }),
            ErrorKind::DegenerateInput);
}
