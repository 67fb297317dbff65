#include <benchmark/benchmark.h>

#include <random>

#include "valbench/clustering.hpp"
#include "valbench/kernels.hpp"
#include "valbench/metrics.hpp"
#include "valbench/validators.hpp"

using namespace valbench;

namespace {

Matrix gaussian(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix m(rows, cols);
  for (double& v : m.data) v = normal(rng);
  return m;
}

void BM_NuclearNorm(benchmark::State& state) {
  const Matrix m = gaussian(state.range(0), state.range(1), 1);
  for (auto _ : state) benchmark::DoNotOptimize(nuclear_norm(m));
}
BENCHMARK(BM_NuclearNorm)->Args({500, 5})->Args({500, 16})->Args({512, 64});

void BM_Snd(benchmark::State& state) {
  const Matrix m = gaussian(state.range(0), 16, 2);
  for (auto _ : state) benchmark::DoNotOptimize(snd_from_matrix(m, 0.05));
}
BENCHMARK(BM_Snd)->Arg(250)->Arg(500)->Arg(1000);

void BM_KMeans(benchmark::State& state) {
  const Matrix m = gaussian(state.range(0), 16, 3);
  for (auto _ : state) benchmark::DoNotOptimize(kmeans(m, 5, 0).inertia);
}
BENCHMARK(BM_KMeans)->Arg(500)->Arg(1000);

void BM_WeightedSpearman(benchmark::State& state) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u;
  PairedSeries s;
  for (int i = 0; i < state.range(0); ++i) {
    s.scores.push_back(u(rng));
    s.accuracies.push_back(u(rng));
  }
  for (auto _ : state) benchmark::DoNotOptimize(weighted_spearman(s));
}
BENCHMARK(BM_WeightedSpearman)->Arg(200)->Arg(2000);

}  // namespace
BENCHMARK_MAIN();
