#include "valbench/engine.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#include "valbench/synth.hpp"

namespace valbench {

std::vector<ScoredCheckpoint> score_benchmark(const BenchmarkIndex& index,
                                              std::span<const ValidatorVariant> variants,
                                              const ScoringOptions& options, std::size_t jobs) {
  struct Work {
    CheckpointKey key;
    const std::filesystem::path* path;
  };
  std::vector<Work> work;
  for (const auto& task : index.tasks)
    for (const auto& run : task.runs)
      for (const auto& ckpt : run.checkpoints)
        work.push_back({{task.task_id, run.algorithm, run.run_id, ckpt.checkpoint_index}, &ckpt.path});

  std::vector<ScoredCheckpoint> out(work.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < work.size(); i = next++) {
      ScoredCheckpoint& result = out[i];
      result.key = work[i].key;
      try {
        const auto record = load_checkpoint(*work[i].path);
        result.scores = score_all(record, variants, options);
        if (record.target.labels) result.accuracy = oracle_accuracy(record);
      } catch (const std::exception& e) {
        result.error = e.what();
      }
    }
  };

  const std::size_t threads = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(1, work.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return out;
}

ScoreTable to_score_table(std::span<const ScoredCheckpoint> scored, std::span<const ValidatorVariant> variants) {
  std::vector<std::string> names;
  for (const auto& v : variants) names.push_back(v.name());
  std::vector<CheckpointKey> keys;
  for (const auto& s : scored) keys.push_back(s.key);
  ScoreTable table(std::move(names), std::move(keys));
  for (std::size_t c = 0; c < scored.size(); ++c) {
    if (scored[c].accuracy) table.set_accuracy(c, *scored[c].accuracy);
    for (std::size_t v = 0; v < scored[c].scores.size(); ++v) {
      const auto& s = scored[c].scores[v];
      if (s.ok()) table.set_score(c, v, s.oriented);
    }
  }
  return table;
}

}  // namespace valbench
