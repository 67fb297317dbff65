#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "valbench/checkpoint.hpp"

namespace valbench {

enum class Pathology { None, CollapseClusters, ConfidentWrong };

struct SynthConfig {
  std::size_t num_tasks = 3;
  std::size_t runs_per_task = 10;
  std::size_t checkpoints_per_run = 20;
  std::uint32_t num_classes = 5;
  std::size_t feature_dim = 16;
  std::size_t samples_per_split = 500;
  std::vector<std::string> algorithms = {"Synth"};  // assigned to runs round-robin

  // Quality curve of a run: rises from start_fraction * peak to the peak at a
  // random position, then drops linearly by up to overfit_max * peak.
  double peak_quality_min = 0.3;
  double peak_quality_max = 1.0;
  double peak_position_min = 0.3;
  double peak_position_max = 0.8;
  double start_fraction = 0.1;
  double overfit_max = 0.5;

  double separation_max = 6.0;  // class-mean distance along its axis at quality 1
  double logit_scale = 1.5;
  double logit_noise = 2.0;     // extra logit noise, scaled by (1 - quality)
  double domain_shift = 0.0;    // target feature offset magnitude

  bool collapse_clusters = false;
  bool confident_wrong = false;
  double pathology_fraction = 0.05;
  double collapse_factor = 1e-4;

  std::uint64_t seed = 7;

  /// Throws InvalidArgument when a count is zero or a range is inverted.
  void validate() const;
};

/// Generator quality q in [0, 1] of one checkpoint.
double checkpoint_quality(const SynthConfig& config, std::size_t task, std::size_t run, std::size_t index);

/// Pathology assigned to one checkpoint by the config's flags and fraction.
Pathology checkpoint_pathology(const SynthConfig& config, std::size_t task, std::size_t run, std::size_t index);

std::string synth_task_id(std::size_t task);

/// One checkpoint at an explicit quality, without pathologies.
CheckpointRecord make_checkpoint(const SynthConfig& config, std::size_t task, std::size_t run, std::size_t index,
                                 double quality);

/// One checkpoint exactly as `generate_benchmark` writes it.
CheckpointRecord generate_checkpoint(const SynthConfig& config, std::size_t task, std::size_t run,
                                     std::size_t index);

struct SynthSummary {
  std::size_t tasks = 0;
  std::size_t runs = 0;
  std::size_t checkpoints = 0;
  std::size_t pathological = 0;
};

/// Writes the full tree under `root` in the checkpoint directory format.
SynthSummary generate_benchmark(const SynthConfig& config, const std::filesystem::path& root, std::size_t jobs = 1);

/// Target accuracy from target labels (argmax ties to the lowest class).
double oracle_accuracy(const CheckpointRecord& record);

/// collapse_clusters shrinks target features toward their mean;
/// confident_wrong makes target logits one-hot on a wrong class.
CheckpointRecord inject_pathology(CheckpointRecord record, Pathology flag, double collapse_factor = 1e-4);

}  // namespace valbench
