#pragma once

#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "valbench/checkpoint.hpp"
#include "valbench/error.hpp"
#include "valbench/kernels.hpp"

namespace fixtures {

/// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "valbench") {
    std::random_device rd;
    const auto base = std::filesystem::temp_directory_path();
    do {
      path_ = base / (tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    } while (std::filesystem::exists(path_));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& child) const { return path_ / child; }

 private:
  std::filesystem::path path_;
};

inline valbench::Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng, double sd = 1.0) {
  std::normal_distribution<double> normal(0.0, sd);
  valbench::Matrix m(rows, cols);
  for (double& v : m.data) v = normal(rng);
  return m;
}

inline valbench::ArrayF32 random_array(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::normal_distribution<float> normal(0.0f, 1.0f);
  valbench::ArrayF32 a(rows, cols);
  for (float& v : a.data) v = normal(rng);
  return a;
}

inline valbench::SplitData random_split(std::size_t n, std::size_t d, std::uint32_t c, std::mt19937_64& rng,
                                        bool with_labels = true) {
  valbench::SplitData split;
  split.features = random_array(n, d, rng);
  split.logits = random_array(n, c, rng);
  if (with_labels) {
    std::uniform_int_distribution<std::uint32_t> label(0, c - 1);
    valbench::LabelVector labels(n);
    for (auto& l : labels) l = label(rng);
    split.labels = std::move(labels);
  }
  return split;
}

inline valbench::CheckpointRecord random_record(std::size_t n, std::size_t d, std::uint32_t c, std::uint64_t seed,
                                                const std::string& task = "task_0", std::int64_t run = 0,
                                                std::int64_t index = 0) {
  std::mt19937_64 rng(seed);
  valbench::CheckpointRecord r;
  r.task_id = task;
  r.algorithm = "Algo";
  r.run_id = run;
  r.checkpoint_index = index;
  r.num_classes = c;
  r.source_train = random_split(n, d, c, rng);
  r.source_val = random_split(n, d, c, rng);
  r.target = random_split(n, d, c, rng);
  return r;
}

/// One-hot logits (`hot` on the chosen column, 0 elsewhere) for each label.
inline valbench::ArrayF32 one_hot_logits(const std::vector<std::uint32_t>& classes, std::uint32_t c,
                                         float hot = 1.0f) {
  valbench::ArrayF32 a(classes.size(), c);
  for (std::size_t i = 0; i < classes.size(); ++i) a(i, classes[i]) = hot;
  return a;
}

inline std::vector<std::vector<double>> to_rows(const valbench::Matrix& m) {
  std::vector<std::vector<double>> out(m.rows);
  for (std::size_t i = 0; i < m.rows; ++i) out[i].assign(m.row(i).begin(), m.row(i).end());
  return out;
}

/// Kind of the valbench::Error thrown by `fn`, or nullopt if none is thrown.
template <class Fn>
std::optional<valbench::ErrorKind> error_kind(Fn&& fn) {
  try {
    fn();
  } catch (const valbench::Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

}  // namespace fixtures
