#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "valbench/checkpoint.hpp"
#include "valbench/discriminator.hpp"
#include "valbench/kernels.hpp"

namespace valbench {

enum class Family { Accuracy, Entropy, BNM, SND, ClassAMI, ClassSS, DEV, DEVN };

enum class SplitSelector {
  SourceTrain,
  SourceVal,
  Target,
  SourceTrainTarget,  // "SourceTrain+Target"
  SourceValTarget,    // "SourceVal+Target"
  SourceTarget,       // "Source+Target": concat(source train, target)
};

const char* family_name(Family family);
const char* selector_name(SplitSelector selector);

/// true when a higher raw score predicts higher accuracy.
bool is_ascending(Family family);

struct ValidatorVariant {
  Family family = Family::Accuracy;
  std::optional<SplitSelector> selector;
  std::optional<Representation> representation;
  std::optional<double> temperature;

  /// Canonical name, e.g. `BNM|SourceTrain+Target`, `SND|preds|tau=0.05`.
  std::string name() const;
  bool operator==(const ValidatorVariant&) const = default;
};

/// The 35 benchmarked variants in a fixed order.
const std::vector<ValidatorVariant>& all_variants();

/// Looks up a variant by canonical name.
std::optional<ValidatorVariant> find_variant(const std::string& name);

// Individual validators. Raw scores; see `is_ascending` for orientation.

double accuracy_score(const SplitData& split);
double entropy_score(const CheckpointRecord& record, SplitSelector selector);
double bnm_score(const CheckpointRecord& record, SplitSelector selector);
double snd_score(const CheckpointRecord& record, Representation rep, double temperature);
double class_ami_score(const CheckpointRecord& record, SplitSelector selector, Representation rep,
                       std::uint64_t seed);
double class_ss_score(const CheckpointRecord& record, SplitSelector selector, Representation rep,
                      std::uint64_t seed);

/// Per-split BNM: nuclear norm / sqrt(N * min(N, C)).
double bnm_split_score(const Matrix& probs);

/// SND on an arbitrary representation matrix (rows are samples).
double snd_from_matrix(const Matrix& rows, double temperature);

struct DevResult {
  double score = 0.0;  // raw DEV value
  double eta = 0.0;
  bool degenerate = false;  // Var(W) below 1e-12; eta forced to 0
};

/// Control-variate risk mean(L) + eta * mean(W) - eta with
/// eta = Cov(L, W) / Var(W) (population moments). `weighted_losses` holds
/// L_i = W_i * loss_i.
DevResult dev_estimate(std::span<const double> weighted_losses, std::span<const double> weights);

/// W_max = W / max(W) - mean(W / max(W)) + 1.
std::vector<double> max_normalize_weights(std::span<const double> weights);

DevResult dev_score(const CheckpointRecord& record, Representation rep, const TrainConfig& config = {});
DevResult devn_score(const CheckpointRecord& record, Representation rep, const TrainConfig& config = {});

/// Representation of one split: features, raw logits or softmax(logits).
Matrix representation_matrix(const SplitData& split, Representation rep);

struct Score {
  std::string variant;
  double raw = 0.0;
  double oriented = 0.0;
  bool degenerate = false;
  std::optional<std::string> error;

  bool ok() const { return !error.has_value(); }
};

struct ScoringOptions {
  std::uint64_t seed = 0;
  TrainConfig discriminator;
};

/// One Score per variant. A failing variant yields an error entry. Shared
/// intermediates (similarity matrices, discriminators) are computed once per
/// call.
std::vector<Score> score_all(const CheckpointRecord& record, std::span<const ValidatorVariant> variants,
                             const ScoringOptions& options = {});

}  // namespace valbench
