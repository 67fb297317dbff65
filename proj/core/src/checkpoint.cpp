#include "valbench/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "valbench/error.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace valbench {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MissingFile: return "missing file";
    case ErrorKind::ShapeMismatch: return "shape mismatch";
    case ErrorKind::NonFinite: return "non-finite value";
    case ErrorKind::LabelOutOfRange: return "label out of range";
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::DegenerateInput: return "degenerate input";
    case ErrorKind::EmptyBenchmark: return "empty benchmark";
    case ErrorKind::Duplicate: return "duplicate";
    case ErrorKind::Io: return "i/o error";
    case ErrorKind::Parse: return "parse error";
  }
  return "unknown";
}

ArrayF32::ArrayF32(std::size_t r, std::size_t c, std::vector<float> values)
    : rows(r), cols(c), data(std::move(values)) {
  if (data.size() != rows * cols) {
    throw Error(ErrorKind::ShapeMismatch, "array data length " + std::to_string(data.size()) +
                                              " != " + std::to_string(rows) + "x" +
                                              std::to_string(cols));
  }
}

const char* split_name(SplitId split) {
  switch (split) {
    case SplitId::SourceTrain: return "source_train";
    case SplitId::SourceVal: return "source_val";
    case SplitId::Target: return "target";
  }
  return "?";
}

const SplitData& CheckpointRecord::split(SplitId id) const {
  switch (id) {
    case SplitId::SourceTrain: return source_train;
    case SplitId::SourceVal: return source_val;
    case SplitId::Target: return target;
  }
  return target;
}

SplitData& CheckpointRecord::split(SplitId id) {
  return const_cast<SplitData&>(std::as_const(*this).split(id));
}

namespace {

constexpr SplitId kSplits[] = {SplitId::SourceTrain, SplitId::SourceVal, SplitId::Target};

template <typename T>
void swap_if_big_endian(std::vector<T>& values) {
  if constexpr (std::endian::native == std::endian::big) {
    for (auto& v : values) {
      unsigned char bytes[sizeof(T)];
      std::memcpy(bytes, &v, sizeof(T));
      std::reverse(std::begin(bytes), std::end(bytes));
      std::memcpy(&v, bytes, sizeof(T));
    }
  }
}

template <typename T>
std::vector<T> read_raw(const fs::path& file, std::size_t expected_count) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorKind::MissingFile, "cannot open " + file.string());
  in.seekg(0, std::ios::end);
  const auto bytes = static_cast<std::size_t>(in.tellg());
  in.seekg(0, std::ios::beg);
  if (bytes != expected_count * sizeof(T)) {
    throw Error(ErrorKind::ShapeMismatch,
                file.filename().string() + ": expected " +
                    std::to_string(expected_count * sizeof(T)) + " bytes, found " +
                    std::to_string(bytes));
  }
  std::vector<T> values(expected_count);
  in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(bytes));
  if (!in) throw Error(ErrorKind::Io, "short read on " + file.string());
  swap_if_big_endian(values);
  return values;
}

template <typename T>
void write_raw(const fs::path& file, std::vector<T> values) {
  swap_if_big_endian(values);
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot create " + file.string());
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(T)));
  if (!out) throw Error(ErrorKind::Io, "write failed on " + file.string());
}

json read_manifest(const fs::path& dir) {
  const auto file = dir / "manifest.json";
  std::ifstream in(file);
  if (!in) throw Error(ErrorKind::MissingFile, "missing " + file.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, file.string() + ": " + e.what());
  }
}

template <typename T>
T manifest_get(const json& manifest, const char* key, const fs::path& dir) {
  if (!manifest.contains(key)) {
    throw Error(ErrorKind::Parse, (dir / "manifest.json").string() + ": missing key '" + key + "'");
  }
  try {
    return manifest.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse,
                (dir / "manifest.json").string() + ": bad value for '" + key + "': " + e.what());
  }
}

std::string array_file(SplitId split, const char* kind) {
  return std::string(split_name(split)) + "." + kind;
}

void check_finite(const ArrayF32& array, SplitId split, const char* what) {
  for (std::size_t i = 0; i < array.data.size(); ++i) {
    if (!std::isfinite(array.data[i])) {
      throw Error(ErrorKind::NonFinite, std::string(split_name(split)) + "." + what + ": value at row " +
                                            std::to_string(i / array.cols) + ", col " +
                                            std::to_string(i % array.cols) + " is not finite");
    }
  }
}

std::optional<std::int64_t> parse_suffix(const std::string& name, const std::string& prefix) {
  if (name.size() <= prefix.size() || name.compare(0, prefix.size(), prefix) != 0) return std::nullopt;
  std::int64_t value = 0;
  const char* first = name.data() + prefix.size();
  const char* last = name.data() + name.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return value;
}

std::vector<fs::path> sorted_subdirs(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory()) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

CheckpointRecord load_checkpoint(const fs::path& dir) {
  const json manifest = read_manifest(dir);

  CheckpointRecord record;
  record.task_id = manifest_get<std::string>(manifest, "task_id", dir);
  record.algorithm = manifest_get<std::string>(manifest, "algorithm", dir);
  record.run_id = manifest_get<std::int64_t>(manifest, "run_id", dir);
  record.checkpoint_index = manifest_get<std::int64_t>(manifest, "checkpoint_index", dir);
  record.num_classes = manifest_get<std::uint32_t>(manifest, "num_classes", dir);
  if (record.num_classes == 0) {
    throw Error(ErrorKind::ShapeMismatch, dir.string() + ": num_classes must be >= 1");
  }
  const std::size_t classes = record.num_classes;

  for (SplitId id : kSplits) {
    const json shape = manifest_get<json>(manifest, split_name(id), dir);
    const auto n = manifest_get<std::size_t>(shape, "n", dir);
    const auto dim = manifest_get<std::size_t>(shape, "feature_dim", dir);

    SplitData& split = record.split(id);
    split.features = ArrayF32(n, dim, read_raw<float>(dir / array_file(id, "features.f32"), n * dim));
    split.logits = ArrayF32(n, classes, read_raw<float>(dir / array_file(id, "logits.f32"), n * classes));
    check_finite(split.features, id, "features");
    check_finite(split.logits, id, "logits");

    const auto label_path = dir / array_file(id, "labels.u32");
    if (id != SplitId::Target || fs::exists(label_path)) {
      auto labels = read_raw<std::uint32_t>(label_path, n);
      for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= classes) {
          throw Error(ErrorKind::LabelOutOfRange,
                      std::string(split_name(id)) + ".labels: value " + std::to_string(labels[i]) +
                          " at position " + std::to_string(i) + " >= num_classes " +
                          std::to_string(classes));
        }
      }
      split.labels = std::move(labels);
    }
  }
  return record;
}

void write_checkpoint(const CheckpointRecord& record, const fs::path& dir) {
  fs::create_directories(dir);
  json manifest;
  manifest["task_id"] = record.task_id;
  manifest["algorithm"] = record.algorithm;
  manifest["run_id"] = record.run_id;
  manifest["checkpoint_index"] = record.checkpoint_index;
  manifest["num_classes"] = record.num_classes;
  for (SplitId id : kSplits) {
    const SplitData& split = record.split(id);
    if (split.logits.cols != record.num_classes || split.logits.rows != split.features.rows) {
      throw Error(ErrorKind::ShapeMismatch,
                  std::string("cannot write ") + split_name(id) + ": logits shape does not match");
    }
    manifest[split_name(id)] = {{"n", split.features.rows}, {"feature_dim", split.features.cols}};
    write_raw(dir / array_file(id, "features.f32"), split.features.data);
    write_raw(dir / array_file(id, "logits.f32"), split.logits.data);
    const auto label_path = dir / array_file(id, "labels.u32");
    if (split.labels) {
      write_raw(label_path, *split.labels);
    } else if (id != SplitId::Target) {
      throw Error(ErrorKind::InvalidArgument,
                  std::string("cannot write ") + split_name(id) + ": source splits need labels");
    } else {
      fs::remove(label_path);
    }
  }
  std::ofstream out(dir / "manifest.json", std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot create " + (dir / "manifest.json").string());
  out << manifest.dump(2) << '\n';
}

fs::path checkpoint_dir(const fs::path& root, const std::string& task_id, std::int64_t run_id,
                        std::int64_t checkpoint_index) {
  return root / task_id / ("run_" + std::to_string(run_id)) /
         ("ckpt_" + std::to_string(checkpoint_index));
}

std::size_t BenchmarkIndex::checkpoint_count() const {
  std::size_t total = 0;
  for (const auto& task : tasks)
    for (const auto& run : task.runs) total += run.checkpoints.size();
  return total;
}

std::size_t BenchmarkIndex::run_count() const {
  std::size_t total = 0;
  for (const auto& task : tasks) total += task.runs.size();
  return total;
}

BenchmarkIndex scan_benchmark(const fs::path& root) {
  if (!fs::is_directory(root)) {
    throw Error(ErrorKind::MissingFile, "benchmark root " + root.string() + " is not a directory");
  }
  BenchmarkIndex index;
  for (const auto& task_dir : sorted_subdirs(root)) {
    TaskEntry task;
    task.task_id = task_dir.filename().string();
    std::map<std::int64_t, RunEntry> runs;
    for (const auto& run_dir : sorted_subdirs(task_dir)) {
      const auto run_id = parse_suffix(run_dir.filename().string(), "run_");
      if (!run_id) continue;
      RunEntry& run = runs[*run_id];
      run.run_id = *run_id;
      for (const auto& ckpt_dir : sorted_subdirs(run_dir)) {
        const auto ckpt_index = parse_suffix(ckpt_dir.filename().string(), "ckpt_");
        if (!ckpt_index) continue;
        const json manifest = read_manifest(ckpt_dir);
        const auto task_id = manifest_get<std::string>(manifest, "task_id", ckpt_dir);
        const auto m_run = manifest_get<std::int64_t>(manifest, "run_id", ckpt_dir);
        const auto m_index = manifest_get<std::int64_t>(manifest, "checkpoint_index", ckpt_dir);
        const auto algorithm = manifest_get<std::string>(manifest, "algorithm", ckpt_dir);
        if (task_id != task.task_id || m_run != *run_id || m_index != *ckpt_index) {
          throw Error(ErrorKind::InvalidArgument,
                      ckpt_dir.string() + ": manifest metadata disagrees with directory layout");
        }
        if (run.checkpoints.empty()) {
          run.algorithm = algorithm;
        } else if (run.algorithm != algorithm) {
          throw Error(ErrorKind::InvalidArgument,
                      ckpt_dir.string() + ": algorithm differs from the rest of run " +
                          std::to_string(*run_id));
        }
        run.checkpoints.push_back({*ckpt_index, ckpt_dir});
      }
    }
    for (auto& [run_id, run] : runs) {
      if (run.checkpoints.empty()) {
        throw Error(ErrorKind::EmptyBenchmark,
                    task.task_id + "/run_" + std::to_string(run_id) + " has no checkpoints");
      }
      std::stable_sort(run.checkpoints.begin(), run.checkpoints.end(),
                       [](const auto& a, const auto& b) { return a.checkpoint_index < b.checkpoint_index; });
      for (std::size_t i = 1; i < run.checkpoints.size(); ++i) {
        if (run.checkpoints[i].checkpoint_index == run.checkpoints[i - 1].checkpoint_index) {
          throw Error(ErrorKind::Duplicate,
                      task.task_id + "/run_" + std::to_string(run_id) + ": duplicate checkpoint_index " +
                          std::to_string(run.checkpoints[i].checkpoint_index));
        }
      }
      task.runs.push_back(std::move(run));
    }
    if (!task.runs.empty()) index.tasks.push_back(std::move(task));
  }
  if (index.tasks.empty()) {
    throw Error(ErrorKind::EmptyBenchmark, "no checkpoints found under " + root.string());
  }
  return index;
}

std::vector<Diagnostic> validate_record(const CheckpointRecord& record) {
  std::vector<Diagnostic> out;
  const std::size_t classes = record.num_classes;
  if (classes == 0) out.push_back({"", "num_classes is 0"});

  for (SplitId id : kSplits) {
    const SplitData& split = record.split(id);
    const std::string name = split_name(id);
    auto report = [&](std::string message) { out.push_back({name, std::move(message)}); };

    for (const auto* array : {&split.features, &split.logits}) {
      const char* what = array == &split.features ? "features" : "logits";
      if (array->data.size() != array->rows * array->cols) {
        report(std::string(what) + " data length does not match rows x cols");
        continue;
      }
      for (std::size_t i = 0; i < array->data.size(); ++i) {
        if (!std::isfinite(array->data[i])) {
          report(std::string(what) + " non-finite value at row " + std::to_string(i / array->cols) +
                 ", col " + std::to_string(i % array->cols));
        }
      }
    }
    if (split.features.rows != split.logits.rows) report("features and logits row counts differ");
    if (split.logits.cols != classes) {
      report("logits have " + std::to_string(split.logits.cols) + " columns, expected " +
             std::to_string(classes));
    }
    if (!split.labels) {
      if (id != SplitId::Target) report("labels are required on source splits");
      continue;
    }
    if (split.labels->size() != split.features.rows) report("label count differs from row count");
    for (std::size_t i = 0; i < split.labels->size(); ++i) {
      if ((*split.labels)[i] >= classes) {
        report("label " + std::to_string((*split.labels)[i]) + " at position " + std::to_string(i) +
               " is not below num_classes " + std::to_string(classes));
      }
    }
  }
  return out;
}

}  // namespace valbench
