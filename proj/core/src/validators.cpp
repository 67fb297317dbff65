#include "valbench/validators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <numeric>

#include "valbench/clustering.hpp"
#include "valbench/error.hpp"

namespace valbench {

const char* family_name(Family family) {
  switch (family) {
    case Family::Accuracy: return "Accuracy";
    case Family::Entropy: return "Entropy";
    case Family::BNM: return "BNM";
    case Family::SND: return "SND";
    case Family::ClassAMI: return "ClassAMI";
    case Family::ClassSS: return "ClassSS";
    case Family::DEV: return "DEV";
    case Family::DEVN: return "DEVN";
  }
  return "?";
}

const char* selector_name(SplitSelector selector) {
  switch (selector) {
    case SplitSelector::SourceTrain: return "SourceTrain";
    case SplitSelector::SourceVal: return "SourceVal";
    case SplitSelector::Target: return "Target";
    case SplitSelector::SourceTrainTarget: return "SourceTrain+Target";
    case SplitSelector::SourceValTarget: return "SourceVal+Target";
    case SplitSelector::SourceTarget: return "Source+Target";
  }
  return "?";
}

bool is_ascending(Family family) {
  switch (family) {
    case Family::Entropy:
    case Family::DEV:
    case Family::DEVN: return false;
    default: return true;
  }
}

std::string ValidatorVariant::name() const {
  std::string out = family_name(family);
  if (selector) out += std::string("|") + selector_name(*selector);
  if (representation) out += std::string("|") + representation_name(*representation);
  if (temperature) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "|tau=%g", *temperature);
    out += buf;
  }
  return out;
}

const std::vector<ValidatorVariant>& all_variants() {
  static const std::vector<ValidatorVariant> variants = [] {
    using S = SplitSelector;
    using R = Representation;
    std::vector<ValidatorVariant> v;
    for (S s : {S::SourceTrain, S::SourceVal}) v.push_back({Family::Accuracy, s, {}, {}});
    for (S s : {S::SourceTrain, S::SourceTrainTarget, S::SourceVal, S::SourceValTarget, S::Target})
      v.push_back({Family::BNM, s, {}, {}});
    for (Family f : {Family::ClassAMI, Family::ClassSS})
      for (S s : {S::SourceTarget, S::Target})
        for (R r : {R::Features, R::Logits}) v.push_back({f, s, r, {}});
    for (Family f : {Family::DEV, Family::DEVN})
      for (R r : {R::Features, R::Logits, R::Preds}) v.push_back({f, {}, r, {}});
    for (S s : {S::SourceTrain, S::SourceTrainTarget, S::SourceVal, S::SourceValTarget, S::Target})
      v.push_back({Family::Entropy, s, {}, {}});
    for (R r : {R::Features, R::Logits, R::Preds})
      for (double tau : {0.05, 0.1, 0.5}) v.push_back({Family::SND, {}, r, tau});
    return v;
  }();
  return variants;
}

std::optional<ValidatorVariant> find_variant(const std::string& name) {
  for (const auto& v : all_variants())
    if (v.name() == name) return v;
  return std::nullopt;
}

Matrix representation_matrix(const SplitData& split, Representation rep) {
  switch (rep) {
    case Representation::Features: return Matrix(split.features);
    case Representation::Logits: return Matrix(split.logits);
    case Representation::Preds: return softmax(Matrix(split.logits), 1.0);
  }
  return {};
}

namespace {

std::vector<SplitId> splits_of(SplitSelector selector) {
  switch (selector) {
    case SplitSelector::SourceTrain: return {SplitId::SourceTrain};
    case SplitSelector::SourceVal: return {SplitId::SourceVal};
    case SplitSelector::Target: return {SplitId::Target};
    case SplitSelector::SourceTrainTarget:
    case SplitSelector::SourceTarget: return {SplitId::SourceTrain, SplitId::Target};
    case SplitSelector::SourceValTarget: return {SplitId::SourceVal, SplitId::Target};
  }
  return {};
}

void require_selector(bool ok, Family family, SplitSelector selector) {
  if (!ok) {
    throw Error(ErrorKind::InvalidArgument,
                std::string(family_name(family)) + " does not accept selector " + selector_name(selector));
  }
}

bool is_single_or_sum(SplitSelector s) { return s != SplitSelector::SourceTarget; }

// Points for ClassAMI / ClassSS: the chosen split(s) stacked, plus predicted labels.
struct ClusterInput {
  Matrix points;
  std::vector<std::uint32_t> predicted;
};

ClusterInput cluster_input(const CheckpointRecord& record, SplitSelector selector, Representation rep) {
  if (selector != SplitSelector::Target && selector != SplitSelector::SourceTarget) {
    throw Error(ErrorKind::InvalidArgument,
                std::string("cluster validators accept Target or Source+Target, not ") + selector_name(selector));
  }
  if (rep == Representation::Preds) {
    throw Error(ErrorKind::InvalidArgument, "cluster validators accept features or logits");
  }
  ClusterInput in;
  for (SplitId id : splits_of(selector)) {
    const SplitData& split = record.split(id);
    Matrix part = representation_matrix(split, rep);
    in.points = in.points.rows == 0 ? std::move(part) : vstack(in.points, part);
    for (std::size_t i = 0; i < split.logits.rows; ++i)
      in.predicted.push_back(static_cast<std::uint32_t>(argmax(split.logits.row(i))));
  }
  return in;
}

Matrix snd_similarity(const Matrix& rows) {
  if (rows.rows < 2) throw Error(ErrorKind::DegenerateInput, "SND needs at least 2 target samples");
  return pairwise_similarity(l2_normalize_rows(rows).matrix);
}

double snd_from_similarity(const Matrix& x, double temperature) {
  if (!(temperature > 0.0)) throw Error(ErrorKind::InvalidArgument, "SND temperature must be positive");
  const std::size_t n = x.rows;
  if (n < 2) throw Error(ErrorKind::DegenerateInput, "SND needs at least 2 target samples");
  std::vector<double> row(n - 1);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t k = 0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) row[k++] = x(i, j) / temperature;
    const double peak = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (double& v : row) {
      v = std::exp(v - peak);
      z += v;
    }
    for (double& v : row) v /= z;
    total += shannon_entropy(row);
  }
  return total / static_cast<double>(n);
}

std::vector<double> cross_entropy_losses(const SplitData& split) {
  if (!split.labels) throw Error(ErrorKind::InvalidArgument, "cross-entropy needs labels");
  std::vector<double> out(split.logits.rows);
  for (std::size_t i = 0; i < split.logits.rows; ++i) {
    const auto row = split.logits.row(i);
    const double peak = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (float v : row) z += std::exp(static_cast<double>(v) - peak);
    out[i] = peak + std::log(z) - static_cast<double>(row[(*split.labels)[i]]);
  }
  return out;
}

std::vector<double> train_weights(const CheckpointRecord& record, Representation rep,
                                  const TrainConfig& config) {
  const Matrix source = representation_matrix(record.source_train, rep);
  const Matrix target = representation_matrix(record.target, rep);
  const auto model = train_discriminator(source, target, config, rep);
  const auto probs = predict_target_prob(model, representation_matrix(record.source_val, rep));
  return density_ratio_weights(probs, model.n_source, model.n_target);
}

DevResult dev_from_raw_weights(const CheckpointRecord& record, const std::vector<double>& weights,
                               bool max_normalize) {
  const auto losses = cross_entropy_losses(record.source_val);
  const std::vector<double> w = max_normalize ? max_normalize_weights(weights) : weights;
  std::vector<double> weighted(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) weighted[i] = w[i] * losses[i];
  return dev_estimate(weighted, w);
}

}  // namespace

double accuracy_score(const SplitData& split) {
  if (!split.labels) throw Error(ErrorKind::InvalidArgument, "accuracy needs labels");
  const std::size_t n = split.logits.rows;
  if (n == 0) throw Error(ErrorKind::DegenerateInput, "accuracy of an empty split");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (argmax(split.logits.row(i)) == (*split.labels)[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(n);
}

double entropy_score(const CheckpointRecord& record, SplitSelector selector) {
  require_selector(is_single_or_sum(selector), Family::Entropy, selector);
  double total = 0.0;
  for (SplitId id : splits_of(selector)) total += mean_row_entropy(softmax(Matrix(record.split(id).logits)));
  return total;
}

double bnm_split_score(const Matrix& probs) {
  if (probs.rows == 0 || probs.cols == 0) throw Error(ErrorKind::DegenerateInput, "BNM of an empty split");
  const double scale = std::sqrt(static_cast<double>(probs.rows) *
                                 static_cast<double>(std::min(probs.rows, probs.cols)));
  return nuclear_norm(probs) / scale;
}

double bnm_score(const CheckpointRecord& record, SplitSelector selector) {
  require_selector(is_single_or_sum(selector), Family::BNM, selector);
  double total = 0.0;
  for (SplitId id : splits_of(selector)) total += bnm_split_score(softmax(Matrix(record.split(id).logits)));
  return total;
}

double snd_from_matrix(const Matrix& rows, double temperature) {
  return snd_from_similarity(snd_similarity(rows), temperature);
}

double snd_score(const CheckpointRecord& record, Representation rep, double temperature) {
  return snd_from_matrix(representation_matrix(record.target, rep), temperature);
}

double class_ami_score(const CheckpointRecord& record, SplitSelector selector, Representation rep,
                       std::uint64_t seed) {
  const auto in = cluster_input(record, selector, rep);
  const auto clusters = kmeans(in.points, record.num_classes, seed);
  return adjusted_mutual_information(in.predicted, clusters.labels);
}

double class_ss_score(const CheckpointRecord& record, SplitSelector selector, Representation rep,
                      std::uint64_t seed) {
  const auto in = cluster_input(record, selector, rep);
  const Matrix normalized = l2_normalize_rows(in.points).matrix;
  const auto clusters = kmeans(normalized, record.num_classes, seed);
  return silhouette_score(normalized, clusters.labels);
}

DevResult dev_estimate(std::span<const double> weighted_losses, std::span<const double> weights) {
  const std::size_t n = weights.size();
  if (n == 0 || weighted_losses.size() != n) {
    throw Error(ErrorKind::InvalidArgument, "DEV needs equal-length, non-empty L and W");
  }
  const double inv = 1.0 / static_cast<double>(n);
  const double mean_l = std::accumulate(weighted_losses.begin(), weighted_losses.end(), 0.0) * inv;
  const double mean_w = std::accumulate(weights.begin(), weights.end(), 0.0) * inv;
  double cov = 0.0, var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dw = weights[i] - mean_w;
    cov += (weighted_losses[i] - mean_l) * dw;
    var += dw * dw;
  }
  cov *= inv;
  var *= inv;

  DevResult out;
  if (var < 1e-12) {
    out.degenerate = true;
    out.eta = 0.0;
    out.score = mean_l;
    return out;
  }
  out.eta = cov / var;
  out.score = mean_l + out.eta * mean_w - out.eta;
  return out;
}

std::vector<double> max_normalize_weights(std::span<const double> weights) {
  if (weights.empty()) return {};
  const double peak = *std::max_element(weights.begin(), weights.end());
  if (!(peak > 0.0)) throw Error(ErrorKind::DegenerateInput, "max-normalization needs a positive weight");
  std::vector<double> v(weights.size());
  double mean = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = weights[i] / peak;
    mean += v[i];
  }
  mean /= static_cast<double>(v.size());
  for (double& x : v) x = x - mean + 1.0;
  return v;
}

DevResult dev_score(const CheckpointRecord& record, Representation rep, const TrainConfig& config) {
  return dev_from_raw_weights(record, train_weights(record, rep, config), false);
}

DevResult devn_score(const CheckpointRecord& record, Representation rep, const TrainConfig& config) {
  return dev_from_raw_weights(record, train_weights(record, rep, config), true);
}

std::vector<Score> score_all(const CheckpointRecord& record, std::span<const ValidatorVariant> variants,
                             const ScoringOptions& options) {
  TrainConfig train = options.discriminator;
  train.seed = options.seed;

  // Intermediates shared between variants of the same representation.
  std::map<Representation, std::shared_ptr<const Matrix>> similarity;
  std::map<Representation, std::shared_ptr<const std::vector<double>>> dev_weights;

  std::vector<Score> out;
  out.reserve(variants.size());
  for (const auto& variant : variants) {
    Score score;
    score.variant = variant.name();
    try {
      double raw = 0.0;
      switch (variant.family) {
        case Family::Accuracy: {
          const auto sel = variant.selector.value();
          require_selector(sel == SplitSelector::SourceTrain || sel == SplitSelector::SourceVal,
                           Family::Accuracy, sel);
          raw = accuracy_score(record.split(splits_of(sel).front()));
          break;
        }
        case Family::Entropy: raw = entropy_score(record, variant.selector.value()); break;
        case Family::BNM: raw = bnm_score(record, variant.selector.value()); break;
        case Family::SND: {
          const auto rep = variant.representation.value();
          auto& x = similarity[rep];
          if (!x) x = std::make_shared<const Matrix>(snd_similarity(representation_matrix(record.target, rep)));
          raw = snd_from_similarity(*x, variant.temperature.value());
          break;
        }
        case Family::ClassAMI:
          raw = class_ami_score(record, variant.selector.value(), variant.representation.value(), options.seed);
          break;
        case Family::ClassSS:
          raw = class_ss_score(record, variant.selector.value(), variant.representation.value(), options.seed);
          break;
        case Family::DEV:
        case Family::DEVN: {
          const auto rep = variant.representation.value();
          auto& w = dev_weights[rep];
          if (!w) w = std::make_shared<const std::vector<double>>(train_weights(record, rep, train));
          const auto result = dev_from_raw_weights(record, *w, variant.family == Family::DEVN);
          raw = result.score;
          score.degenerate = result.degenerate;
          break;
        }
      }
      if (!std::isfinite(raw)) throw Error(ErrorKind::NonFinite, "score is not finite");
      score.raw = raw;
      score.oriented = is_ascending(variant.family) ? raw : -raw;
    } catch (const std::bad_optional_access&) {
      score.error = "variant is missing a required parameter";
    } catch (const std::exception& e) {
      score.error = e.what();
    }
    out.push_back(std::move(score));
  }
  return out;
}

}  // namespace valbench
