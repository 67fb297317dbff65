#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "valbench/metrics.hpp"

namespace valbench {

struct CheckpointKey {
  std::string task_id;
  std::string algorithm;
  std::int64_t run_id = 0;
  std::int64_t checkpoint_index = 0;

  auto operator<=>(const CheckpointKey&) const = default;
};

/// Oriented scores for (checkpoint x variant) plus target accuracy per
/// checkpoint. Missing values (scoring errors, unknown accuracy) are NaN.
class ScoreTable {
 public:
  ScoreTable() = default;
  ScoreTable(std::vector<std::string> variants, std::vector<CheckpointKey> checkpoints);

  const std::vector<std::string>& variants() const { return variants_; }
  const std::vector<CheckpointKey>& checkpoints() const { return checkpoints_; }

  std::optional<std::size_t> variant_index(const std::string& name) const;

  double score(std::size_t checkpoint, std::size_t variant) const {
    return oriented_[checkpoint * variants_.size() + variant];
  }
  void set_score(std::size_t checkpoint, std::size_t variant, double value) {
    oriented_[checkpoint * variants_.size() + variant] = value;
  }
  double accuracy(std::size_t checkpoint) const { return accuracy_[checkpoint]; }
  void set_accuracy(std::size_t checkpoint, double value) { accuracy_[checkpoint] = value; }
  const std::vector<double>& accuracies() const { return accuracy_; }

  /// Appends a variant column; `values` has one entry per checkpoint.
  void add_variant(const std::string& name, std::span<const double> values);

  /// Sorted unique task ids / algorithm names.
  std::vector<std::string> tasks() const;
  std::vector<std::string> algorithms() const;

  /// Checkpoints of one task (optionally one algorithm), skipping NaN scores
  /// or accuracies. `accuracy_override` replaces the stored accuracies.
  PairedSeries series(std::size_t variant, const std::string& task,
                      const std::optional<std::string>& algorithm = std::nullopt,
                      std::span<const double> accuracy_override = {}) const;

  /// Runs of one (task, algorithm) group in run_id order.
  std::vector<RunSeries> runs(std::size_t variant, const std::string& task, const std::string& algorithm,
                              std::span<const double> accuracy_override = {}) const;

 private:
  std::vector<std::string> variants_;
  std::vector<CheckpointKey> checkpoints_;
  std::vector<double> oriented_;
  std::vector<double> accuracy_;
};

/// Name of the pseudo-variant whose scores are the target accuracies.
inline constexpr const char* kOracleVariant = "Oracle";

/// Adds the Oracle column (scores = accuracies) unless already present.
void add_oracle_column(ScoreTable& table);

struct VariantWsc {
  std::string variant;
  std::vector<std::string> tasks;
  std::optional<CrossTaskSummary> summary;  // empty when every task was degenerate
  std::string note;
};

/// Per-task WSC and cross-task mean/std for one variant.
VariantWsc evaluate_wsc(const ScoreTable& table, std::size_t variant,
                        const std::optional<std::string>& algorithm = std::nullopt,
                        std::span<const double> accuracy_override = {});

struct GroupAatn {
  std::string task;
  double value = 0.0;
};

/// AATN for (task, algorithm) groups of one variant. Throws when a group has
/// fewer than n runs.
std::vector<GroupAatn> evaluate_aatn(const ScoreTable& table, std::size_t variant, const std::string& algorithm,
                                     std::size_t n, std::span<const double> accuracy_override = {});

/// Mean of AATN over every (task, algorithm) group.
double mean_aatn(const ScoreTable& table, std::size_t variant, std::size_t n,
                 std::span<const double> accuracy_override = {});

struct NoiseOptions {
  std::vector<double> sigmas;  // accuracy percentage points
  std::vector<std::uint64_t> seeds;
  std::uint64_t master_seed = 0;
  std::size_t aatn_n = 5;
  std::vector<std::size_t> variants;  // empty = every column except the Oracle
};

struct NoisePoint {
  double sigma = 0.0;
  std::string metric;  // "WSC" or "AATN-<n>"
  double mean = 0.0;   // Spearman between noisy and noiseless rankings, in [-1, 1]
  double std = 0.0;    // sample std over seeds
  std::size_t seeds_used = 0;
  std::size_t degenerate = 0;
};

/// Ranking stability of validators under Gaussian noise on accuracies.
std::vector<NoisePoint> noise_resilience(const ScoreTable& table, const NoiseOptions& options);

}  // namespace valbench
