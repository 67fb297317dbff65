#pragma once

#include <optional>
#include <span>
#include <vector>

#include "valbench/checkpoint.hpp"
#include "valbench/evaluation.hpp"
#include "valbench/validators.hpp"

namespace valbench {

struct ScoredCheckpoint {
  CheckpointKey key;
  std::vector<Score> scores;         // one per requested variant, same order
  std::optional<double> accuracy;    // oracle target accuracy when labels exist
  std::optional<std::string> error;  // checkpoint failed to load
};

/// Loads and scores every checkpoint of `index` on up to `jobs` worker
/// threads. Output order follows the index regardless of `jobs`.
std::vector<ScoredCheckpoint> score_benchmark(const BenchmarkIndex& index,
                                              std::span<const ValidatorVariant> variants,
                                              const ScoringOptions& options, std::size_t jobs = 1);

/// Table of oriented scores (NaN for errors) and accuracies.
ScoreTable to_score_table(std::span<const ScoredCheckpoint> scored, std::span<const ValidatorVariant> variants);

}  // namespace valbench
