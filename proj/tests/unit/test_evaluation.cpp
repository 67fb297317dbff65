#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "valbench/engine.hpp"
#include "valbench/error.hpp"
#include "valbench/evaluation.hpp"
#include "valbench/synth.hpp"

using namespace valbench;

namespace {

// Tasks x runs x checkpoints with hump-shaped accuracies; variant k is the
// accuracy plus Gaussian noise of sd 0.05 * k (variant 0 is exact).
ScoreTable toy_table(std::size_t variants, std::uint64_t seed, std::size_t tasks = 3, std::size_t runs = 6,
                     std::size_t ckpts = 10) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.3, 0.9);
  std::vector<CheckpointKey> keys;
  std::vector<double> acc;
  for (std::size_t t = 0; t < tasks; ++t)
    for (std::size_t r = 0; r < runs; ++r) {
      const double peak = u(rng);
      for (std::size_t c = 0; c < ckpts; ++c) {
        keys.push_back({"task_" + std::to_string(t), r % 2 ? "B" : "A", static_cast<std::int64_t>(r),
                        static_cast<std::int64_t>(c)});
        const double x = static_cast<double>(c) / static_cast<double>(ckpts - 1);
        acc.push_back(peak * (1.0 - 2.0 * (x - 0.5) * (x - 0.5)) + 0.01 * normal(rng));
      }
    }
  std::vector<std::string> names;
  for (std::size_t k = 0; k < variants; ++k) names.push_back("v" + std::to_string(k));
  ScoreTable table(names, keys);
  for (std::size_t i = 0; i < keys.size(); ++i) {
    table.set_accuracy(i, acc[i]);
    for (std::size_t k = 0; k < variants; ++k) table.set_score(i, k, acc[i] + 0.05 * k * normal(rng));
  }
  return table;
}

}  // namespace

TEST(ScoreTable, SeriesSkipsMissingValues) {
  ScoreTable table({"v"}, {{"t", "a", 0, 0}, {"t", "a", 0, 1}, {"t", "a", 1, 0}, {"u", "a", 0, 0}});
  for (std::size_t i = 0; i < 4; ++i) table.set_accuracy(i, 0.1 * i);
  table.set_score(0, 0, 1.0);
  table.set_score(1, 0, std::numeric_limits<double>::quiet_NaN());
  table.set_score(2, 0, 3.0);
  table.set_score(3, 0, 4.0);
  const auto s = table.series(0, "t");
  EXPECT_EQ(s.scores, (std::vector<double>{1.0, 3.0}));
  EXPECT_EQ(table.tasks(), (std::vector<std::string>{"t", "u"}));
  const auto runs = table.runs(0, "t", "a");
  ASSERT_EQ(runs.size(), 2u);
  EXPECT_EQ(runs[1].scores, std::vector<double>{3.0});
}

TEST(ScoreTable, OracleColumnScoresHundred) {
  auto table = toy_table(3, 1);
  add_oracle_column(table);
  add_oracle_column(table);  // idempotent
  ASSERT_EQ(table.variants().size(), 4u);
  const auto oracle = *table.variant_index(kOracleVariant);
  const auto r = evaluate_wsc(table, oracle);
  ASSERT_TRUE(r.summary);
  EXPECT_NEAR(r.summary->mean, 100.0, 1e-9);
  EXPECT_EQ(r.summary->tasks_used, 3u);
}

TEST(ScoreTable, WscPerTaskComposes) {
  const auto table = toy_table(3, 2);
  const auto r = evaluate_wsc(table, 2, std::string("A"));
  ASSERT_TRUE(r.summary);
  double total = 0.0;
  for (const auto& task : table.tasks()) {
    const auto s = table.series(2, task, std::string("A"));
    total += oracle::wsc(s.scores, s.accuracies);
  }
  EXPECT_NEAR(r.summary->mean, total / 3.0, 1e-9);
}

TEST(ScoreTable, OracleAatnDominates) {
  auto table = toy_table(5, 3);
  add_oracle_column(table);
  const auto oracle = *table.variant_index(kOracleVariant);
  for (std::size_t n : {1u, 3u}) {
    const double best = mean_aatn(table, oracle, n);
    for (std::size_t v = 0; v < 5; ++v) EXPECT_GE(best, mean_aatn(table, v, n));
  }
  EXPECT_TRUE(fixtures::error_kind([&] { evaluate_aatn(table, 0, "A", 4); }).has_value());
}

TEST(ScoreTable, MetricsIgnoreMonotoneTransforms) {
  auto table = toy_table(2, 4);
  const double wsc = evaluate_wsc(table, 1).summary->mean;
  const double aatn = mean_aatn(table, 1, 2);
  for (std::size_t i = 0; i < table.checkpoints().size(); ++i)
    table.set_score(i, 1, std::exp(5.0 * table.score(i, 1)) - 2.0);
  EXPECT_NEAR(evaluate_wsc(table, 1).summary->mean, wsc, 1e-9);
  EXPECT_NEAR(mean_aatn(table, 1, 2), aatn, 1e-9);
}

TEST(NoiseResilience, ZeroSigmaIsExactlyOne) {
  const auto table = toy_table(8, 5);
  NoiseOptions options;
  options.sigmas = {0.0};
  options.seeds = {0, 1, 2};
  options.aatn_n = 3;
  const auto points = noise_resilience(table, options);
  ASSERT_EQ(points.size(), 2u);
  for (const auto& p : points) {
    EXPECT_EQ(p.mean, 1.0) << p.metric;
    EXPECT_EQ(p.std, 0.0);
    EXPECT_EQ(p.seeds_used, 3u);
  }
}

TEST(NoiseResilience, HugeNoiseApproachesRandomBaseline) {
  const auto table = toy_table(10, 6);
  NoiseOptions options;
  options.sigmas = {1e6};
  for (std::uint64_t s = 0; s < 20; ++s) options.seeds.push_back(s);
  options.aatn_n = 3;
  // Monte-Carlo baseline: rank correlation of independent random orderings of
  // 10 items has mean 0 and sd 1/3; 20 seeds give a standard error of 0.075.
  for (const auto& p : noise_resilience(table, options)) EXPECT_LT(std::abs(p.mean), 0.3) << p.metric;
}

TEST(NoiseResilience, DeterministicAndDecreasing) {
  const auto table = toy_table(10, 7);
  NoiseOptions options;
  options.sigmas = {0.0, 2.0, 20.0};
  for (std::uint64_t s = 0; s < 20; ++s) options.seeds.push_back(s);
  options.master_seed = 11;
  options.aatn_n = 3;
  const auto a = noise_resilience(table, options), b = noise_resilience(table, options);
  ASSERT_EQ(a.size(), 6u);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].mean, b[i].mean);
  for (const char* metric : {"WSC", "AATN-3"}) {
    std::vector<double> curve;
    for (const auto& p : a)
      if (p.metric == metric) curve.push_back(p.mean);
    ASSERT_EQ(curve.size(), 3u);
    EXPECT_GE(curve[0], curve[1]);
    EXPECT_GE(curve[1], curve[2]);
  }
}

TEST(Engine, ThreadCountDoesNotChangeOutput) {
  fixtures::TempDir tmp;
  SynthConfig cfg;
  cfg.num_tasks = 2;
  cfg.runs_per_task = 2;
  cfg.checkpoints_per_run = 3;
  cfg.samples_per_split = 40;
  generate_benchmark(cfg, tmp.path());
  const auto index = scan_benchmark(tmp.path());
  const auto& variants = all_variants();
  const auto one = score_benchmark(index, variants, {}, 1);
  const auto three = score_benchmark(index, variants, {}, 3);
  ASSERT_EQ(one.size(), 12u);
  for (std::size_t c = 0; c < one.size(); ++c) {
    EXPECT_EQ(one[c].key, three[c].key);
    ASSERT_TRUE(one[c].accuracy.has_value());
    for (std::size_t v = 0; v < variants.size(); ++v) EXPECT_EQ(one[c].scores[v].raw, three[c].scores[v].raw);
  }
  const auto table = to_score_table(one, variants);
  EXPECT_EQ(table.variants().size(), 35u);
  EXPECT_EQ(table.accuracy(0), *one[0].accuracy);
  EXPECT_EQ(table.score(5, 7), one[5].scores[7].oriented);
}

TEST(Engine, LoadFailureIsReportedPerCheckpoint) {
  fixtures::TempDir tmp;
  SynthConfig cfg;
  cfg.num_tasks = 1;
  cfg.runs_per_task = 1;
  cfg.checkpoints_per_run = 2;
  cfg.samples_per_split = 20;
  generate_benchmark(cfg, tmp.path());
  std::filesystem::remove(checkpoint_dir(tmp.path(), synth_task_id(0), 0, 1) / "target.logits.f32");
  const std::vector<ValidatorVariant> variants{*find_variant("Accuracy|SourceVal")};
  const auto scored = score_benchmark(scan_benchmark(tmp.path()), variants, {}, 2);
  ASSERT_EQ(scored.size(), 2u);
  EXPECT_FALSE(scored[0].error.has_value());
  EXPECT_TRUE(scored[1].error.has_value());
}
