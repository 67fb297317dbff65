#include "valbench/synth.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <random>
#include <thread>

#include "valbench/error.hpp"
#include "valbench/kernels.hpp"

namespace valbench {

namespace {

enum Stream : std::uint32_t { kClassAxes = 1, kRunShape = 2, kSplit = 3, kPathology = 4 };

std::mt19937_64 stream_rng(std::uint64_t seed, std::initializer_list<std::uint32_t> tags) {
  std::vector<std::uint32_t> words{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  words.insert(words.end(), tags.begin(), tags.end());
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

struct TaskGeometry {
  Matrix axes;  // C x D, unit rows (orthonormal when D >= C)
  std::vector<double> shift;
};

TaskGeometry task_geometry(const SynthConfig& config, std::size_t task) {
  auto rng = stream_rng(config.seed, {kClassAxes, static_cast<std::uint32_t>(task)});
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t c = config.num_classes;
  const std::size_t d = config.feature_dim;

  TaskGeometry g;
  g.axes = Matrix(c, d);
  for (double& v : g.axes.data) v = normal(rng);
  for (std::size_t i = 0; i < c; ++i) {
    auto row = g.axes.row(i);
    if (d >= c) {
      for (std::size_t j = 0; j < i; ++j) {
        const auto prev = g.axes.row(j);
        double dot = 0.0;
        for (std::size_t k = 0; k < d; ++k) dot += row[k] * prev[k];
        for (std::size_t k = 0; k < d; ++k) row[k] -= dot * prev[k];
      }
    }
    double norm = 0.0;
    for (double v : row) norm += v * v;
    norm = std::sqrt(norm);
    for (double& v : row) v /= norm;
  }

  g.shift.assign(d, 0.0);
  double norm = 0.0;
  for (double& v : g.shift) {
    v = normal(rng);
    norm += v * v;
  }
  norm = std::sqrt(norm);
  for (double& v : g.shift) v *= config.domain_shift / norm;
  return g;
}

struct RunShape {
  double peak = 0.0;
  double position = 0.0;
  double overfit = 0.0;
};

RunShape run_shape(const SynthConfig& config, std::size_t task, std::size_t run) {
  auto rng = stream_rng(config.seed, {kRunShape, static_cast<std::uint32_t>(task), static_cast<std::uint32_t>(run)});
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  RunShape s;
  s.peak = config.peak_quality_min + (config.peak_quality_max - config.peak_quality_min) * unit(rng);
  s.position = config.peak_position_min + (config.peak_position_max - config.peak_position_min) * unit(rng);
  s.overfit = config.overfit_max * unit(rng);
  return s;
}

SplitData make_split(const SynthConfig& config, const TaskGeometry& geometry, double quality, bool is_target,
                     std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t n = config.samples_per_split;
  const std::size_t d = config.feature_dim;
  const std::size_t c = config.num_classes;
  const double separation = config.separation_max * quality;
  const double extra_noise = config.logit_noise * (1.0 - quality);

  SplitData split;
  split.features = ArrayF32(n, d);
  split.logits = ArrayF32(n, c);
  LabelVector labels(n);
  std::vector<double> x(d);
  for (std::size_t i = 0; i < n; ++i) {
    const auto y = static_cast<std::uint32_t>(i % c);
    labels[i] = y;
    const auto axis = geometry.axes.row(y);
    for (std::size_t k = 0; k < d; ++k) {
      x[k] = separation * axis[k] + normal(rng);
      if (is_target) x[k] += geometry.shift[k];
      split.features(i, k) = static_cast<float>(x[k]);
    }
    for (std::size_t j = 0; j < c; ++j) {
      const auto u = geometry.axes.row(j);
      double proj = 0.0;
      for (std::size_t k = 0; k < d; ++k) proj += x[k] * u[k];
      split.logits(i, j) = static_cast<float>(config.logit_scale * proj + extra_noise * normal(rng));
    }
  }
  split.labels = std::move(labels);
  return split;
}

}  // namespace

void SynthConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::InvalidArgument, "synth config: " + what); };
  if (num_tasks == 0 || runs_per_task == 0 || checkpoints_per_run == 0) fail("counts must be >= 1");
  if (num_classes < 2) fail("num_classes must be >= 2");
  if (feature_dim == 0 || samples_per_split == 0) fail("feature_dim and samples_per_split must be >= 1");
  if (algorithms.empty()) fail("at least one algorithm name is required");
  if (!(0.0 <= peak_quality_min && peak_quality_min <= peak_quality_max && peak_quality_max <= 1.0))
    fail("peak quality range must satisfy 0 <= min <= max <= 1");
  if (!(0.0 < peak_position_min && peak_position_min <= peak_position_max && peak_position_max <= 1.0))
    fail("peak position range must satisfy 0 < min <= max <= 1");
  if (!(start_fraction >= 0.0 && start_fraction <= 1.0)) fail("start_fraction must be in [0, 1]");
  if (!(overfit_max >= 0.0 && overfit_max <= 1.0)) fail("overfit_max must be in [0, 1]");
  if (!(pathology_fraction >= 0.0 && pathology_fraction <= 1.0)) fail("pathology_fraction must be in [0, 1]");
  if (!(separation_max >= 0.0) || !(logit_scale > 0.0) || !(logit_noise >= 0.0)) fail("bad signal parameters");
}

std::string synth_task_id(std::size_t task) { return "task_" + std::to_string(task); }

double checkpoint_quality(const SynthConfig& config, std::size_t task, std::size_t run, std::size_t index) {
  const RunShape s = run_shape(config, task, run);
  const double t = config.checkpoints_per_run > 1
                       ? static_cast<double>(index) / static_cast<double>(config.checkpoints_per_run - 1)
                       : 1.0;
  double q;
  if (t <= s.position) {
    q = s.peak * (config.start_fraction + (1.0 - config.start_fraction) * t / s.position);
  } else {
    q = s.peak * (1.0 - s.overfit * (t - s.position) / (1.0 - s.position));
  }
  return std::clamp(q, 0.0, 1.0);
}

Pathology checkpoint_pathology(const SynthConfig& config, std::size_t task, std::size_t run, std::size_t index) {
  if (!config.collapse_clusters && !config.confident_wrong) return Pathology::None;
  auto rng = stream_rng(config.seed, {kPathology, static_cast<std::uint32_t>(task), static_cast<std::uint32_t>(run),
                                      static_cast<std::uint32_t>(index)});
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (unit(rng) >= config.pathology_fraction) return Pathology::None;
  if (config.collapse_clusters && config.confident_wrong) {
    return unit(rng) < 0.5 ? Pathology::CollapseClusters : Pathology::ConfidentWrong;
  }
  return config.collapse_clusters ? Pathology::CollapseClusters : Pathology::ConfidentWrong;
}

CheckpointRecord make_checkpoint(const SynthConfig& config, std::size_t task, std::size_t run, std::size_t index,
                                 double quality) {
  config.validate();
  const TaskGeometry geometry = task_geometry(config, task);
  CheckpointRecord record;
  record.task_id = synth_task_id(task);
  record.algorithm = config.algorithms[run % config.algorithms.size()];
  record.run_id = static_cast<std::int64_t>(run);
  record.checkpoint_index = static_cast<std::int64_t>(index);
  record.num_classes = config.num_classes;
  const SplitId splits[] = {SplitId::SourceTrain, SplitId::SourceVal, SplitId::Target};
  for (SplitId id : splits) {
    auto rng = stream_rng(config.seed, {kSplit, static_cast<std::uint32_t>(task), static_cast<std::uint32_t>(run),
                                        static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(id)});
    record.split(id) = make_split(config, geometry, quality, id == SplitId::Target, rng);
  }
  return record;
}

CheckpointRecord generate_checkpoint(const SynthConfig& config, std::size_t task, std::size_t run,
                                     std::size_t index) {
  auto record = make_checkpoint(config, task, run, index, checkpoint_quality(config, task, run, index));
  return inject_pathology(std::move(record), checkpoint_pathology(config, task, run, index), config.collapse_factor);
}

SynthSummary generate_benchmark(const SynthConfig& config, const std::filesystem::path& root, std::size_t jobs) {
  config.validate();
  struct Item {
    std::size_t task, run, index;
  };
  std::vector<Item> items;
  for (std::size_t t = 0; t < config.num_tasks; ++t)
    for (std::size_t r = 0; r < config.runs_per_task; ++r)
      for (std::size_t i = 0; i < config.checkpoints_per_run; ++i) items.push_back({t, r, i});

  SynthSummary summary;
  summary.tasks = config.num_tasks;
  summary.runs = config.num_tasks * config.runs_per_task;
  summary.checkpoints = items.size();
  for (const auto& it : items)
    if (checkpoint_pathology(config, it.task, it.run, it.index) != Pathology::None) ++summary.pathological;

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::string failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t k = next++; k < items.size() && !failed; k = next++) {
      const auto& it = items[k];
      try {
        const auto record = generate_checkpoint(config, it.task, it.run, it.index);
        write_checkpoint(record, checkpoint_dir(root, record.task_id, record.run_id, record.checkpoint_index));
      } catch (const std::exception& e) {
        std::lock_guard lock(failure_mutex);
        if (!failed.exchange(true)) failure = e.what();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(jobs, 1, items.size());
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failed) throw Error(ErrorKind::Io, "synth: " + failure);
  return summary;
}

double oracle_accuracy(const CheckpointRecord& record) {
  if (!record.target.labels) throw Error(ErrorKind::InvalidArgument, "oracle accuracy needs target labels");
  const auto& split = record.target;
  if (split.logits.rows == 0) throw Error(ErrorKind::DegenerateInput, "oracle accuracy of an empty target split");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < split.logits.rows; ++i)
    if (argmax(split.logits.row(i)) == (*split.labels)[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(split.logits.rows);
}

CheckpointRecord inject_pathology(CheckpointRecord record, Pathology flag, double collapse_factor) {
  SplitData& target = record.target;
  switch (flag) {
    case Pathology::None: break;
    case Pathology::CollapseClusters: {
      const std::size_t n = target.features.rows;
      const std::size_t d = target.features.cols;
      if (n == 0) break;
      std::vector<double> centre(d, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < d; ++k) centre[k] += target.features(i, k);
      double norm = 0.0;
      for (double& v : centre) {
        v /= static_cast<double>(n);
        norm += v * v;
      }
      if (std::sqrt(norm) < 1e-6) {
        for (std::size_t k = 0; k < d; ++k) centre[k] = target.features(0, k);
      }
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < d; ++k) {
          const double x = target.features(i, k);
          target.features(i, k) = static_cast<float>(centre[k] + collapse_factor * (x - centre[k]));
        }
      break;
    }
    case Pathology::ConfidentWrong: {
      const std::size_t c = record.num_classes;
      for (std::size_t i = 0; i < target.logits.rows; ++i) {
        const std::size_t truth =
            target.labels ? (*target.labels)[i] : argmax(std::span<const float>(target.logits.row(i)));
        auto row = target.logits.row(i);
        std::fill(row.begin(), row.end(), 0.0f);
        row[(truth + 1) % c] = 100.0f;
      }
      break;
    }
  }
  return record;
}

}  // namespace valbench
