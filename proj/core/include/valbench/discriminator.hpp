#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "valbench/kernels.hpp"

namespace valbench {

enum class Representation { Features, Logits, Preds };

const char* representation_name(Representation rep);

struct TrainConfig {
  double learning_rate = 0.1;
  int epochs = 500;
  double l2_penalty = 1e-4;
  std::uint64_t seed = 0;
};

/// Linear source-vs-target classifier on standardized inputs.
struct DiscriminatorModel {
  std::vector<double> weights;  // D coefficients followed by the bias
  std::vector<double> mean;     // per-column standardization
  std::vector<double> scale;
  Representation representation = Representation::Features;
  std::size_t n_source = 0;
  std::size_t n_target = 0;
  std::uint64_t seed = 0;
  std::vector<double> loss_trace;  // regularized loss after each epoch

  std::size_t dim() const { return mean.size(); }
};

/// Full-batch gradient descent on L2-regularized binary cross-entropy with
/// source rows labelled 0 and target rows labelled 1. The step is halved
/// within an epoch whenever it would raise the loss, so `loss_trace` never
/// increases; training stops early once no halved step lowers the loss.
DiscriminatorModel train_discriminator(const Matrix& source, const Matrix& target,
                                       const TrainConfig& config = {},
                                       Representation rep = Representation::Features);

/// P(target | x), clamped to [1e-6, 1 - 1e-6].
std::vector<double> predict_target_prob(const DiscriminatorModel& model, const Matrix& x);

/// Importance weights (n_source / n_target) * p / (1 - p).
std::vector<double> density_ratio_weights(std::span<const double> probs, std::size_t n_source,
                                          std::size_t n_target);

}  // namespace valbench
