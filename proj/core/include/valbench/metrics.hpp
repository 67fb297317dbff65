#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace valbench {

/// Validator scores (oriented: higher is better) paired with target accuracies.
struct PairedSeries {
  std::vector<double> scores;
  std::vector<double> accuracies;
};

/// w_i = max(dense_rank(v)_i / max rank, dense_rank(a)_i / max rank)^2.
std::vector<double> quadratic_weights(const PairedSeries& series);

/// x_i = sum of weights strictly below i's dense rank plus (t+1)/2 times the
/// mean weight of i's tie group (t = tie group size).
std::vector<double> weighted_ranks(std::span<const double> values, std::span<const double> weights);

/// Weighted Pearson correlation in [-1, 1]. Throws DegenerateInput when either
/// weighted variance is zero.
double weighted_pearson(std::span<const double> x, std::span<const double> y, std::span<const double> w);

/// Weighted Spearman correlation on the x100 scale.
double weighted_spearman(const PairedSeries& series);

/// Average ranks (1-based, ties get the mean position).
std::vector<double> average_ranks(std::span<const double> values);

/// Classic Spearman correlation (Pearson of average ranks) on the x100 scale.
double spearman(std::span<const double> x, std::span<const double> y);

struct TaskCorrelation {
  std::optional<double> wsc;  // empty when the task was excluded
  std::string note;
};

struct CrossTaskSummary {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 with a single task
  std::size_t tasks_used = 0;
  std::vector<TaskCorrelation> per_task;
  bool single_task = false;
};

/// Mean and sample std of per-task WSC. Degenerate tasks are excluded and
/// noted; throws DegenerateInput if every task is excluded.
CrossTaskSummary avg_wsc_across_tasks(std::span<const PairedSeries> per_task);

/// One training run: oriented scores and target accuracies per checkpoint.
struct RunSeries {
  std::vector<double> scores;
  std::vector<double> accuracies;
};

/// Average accuracy of the top-n runs: each run contributes the accuracy of its
/// best-scoring checkpoint (first on ties), runs ordered by that best score
/// (stable, descending).
double aatn(std::span<const RunSeries> runs, std::size_t n);

}  // namespace valbench
