#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace valbench {

/// Row-major 32-bit float matrix as stored on disk.
struct ArrayF32 {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> data;

  ArrayF32() = default;
  ArrayF32(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0f) {}
  ArrayF32(std::size_t r, std::size_t c, std::vector<float> values);

  float& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  float operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::span<const float> row(std::size_t r) const {
    return {data.data() + r * cols, cols};
  }
  std::span<float> row(std::size_t r) { return {data.data() + r * cols, cols}; }

  bool operator==(const ArrayF32&) const = default;
};

using LabelVector = std::vector<std::uint32_t>;

struct SplitData {
  ArrayF32 features;  // N x D
  ArrayF32 logits;    // N x C
  std::optional<LabelVector> labels;

  std::size_t size() const { return features.rows; }
  bool operator==(const SplitData&) const = default;
};

enum class SplitId { SourceTrain, SourceVal, Target };

const char* split_name(SplitId split);

struct CheckpointRecord {
  std::string task_id;
  std::string algorithm;
  std::int64_t run_id = 0;
  std::int64_t checkpoint_index = 0;
  std::uint32_t num_classes = 0;
  SplitData source_train;
  SplitData source_val;
  SplitData target;

  const SplitData& split(SplitId id) const;
  SplitData& split(SplitId id);
  bool operator==(const CheckpointRecord&) const = default;
};

/// Reads `manifest.json` plus the raw array files of one checkpoint directory.
/// Throws valbench::Error on a missing file, a shape mismatch, a non-finite
/// value or an out-of-range label.
CheckpointRecord load_checkpoint(const std::filesystem::path& dir);

/// Writes `record` in the on-disk checkpoint format, creating `dir`.
void write_checkpoint(const CheckpointRecord& record, const std::filesystem::path& dir);

/// Directory of one checkpoint inside a benchmark tree.
std::filesystem::path checkpoint_dir(const std::filesystem::path& root,
                                     const std::string& task_id, std::int64_t run_id,
                                     std::int64_t checkpoint_index);

struct CheckpointRef {
  std::int64_t checkpoint_index = 0;
  std::filesystem::path path;
};

struct RunEntry {
  std::int64_t run_id = 0;
  std::string algorithm;
  std::vector<CheckpointRef> checkpoints;  // ascending checkpoint_index
};

struct TaskEntry {
  std::string task_id;
  std::vector<RunEntry> runs;  // ascending run_id
};

struct BenchmarkIndex {
  std::vector<TaskEntry> tasks;  // lexicographic task_id

  std::size_t checkpoint_count() const;
  std::size_t run_count() const;
};

/// Enumerates `<root>/<task>/run_<id>/ckpt_<index>/` directories. Manifests are
/// parsed and cross-checked against the directory names.
BenchmarkIndex scan_benchmark(const std::filesystem::path& root);

struct Diagnostic {
  std::string split;  // empty for record-level problems
  std::string message;
};

/// Lists every violated record invariant. Never throws.
std::vector<Diagnostic> validate_record(const CheckpointRecord& record);

}  // namespace valbench
