#include "valbench/discriminator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "valbench/error.hpp"

namespace valbench {

const char* representation_name(Representation rep) {
  switch (rep) {
    case Representation::Features: return "features";
    case Representation::Logits: return "logits";
    case Representation::Preds: return "preds";
  }
  return "?";
}

namespace {

constexpr double kProbFloor = 1e-6;

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

struct Problem {
  Matrix x;  // standardized rows, source first
  std::vector<double> y;
  double l2 = 0.0;

  // Regularized mean BCE at w; fills `grad` with its gradient.
  double evaluate(const std::vector<double>& w, std::vector<double>& grad) const {
    const std::size_t d = x.cols;
    std::fill(grad.begin(), grad.end(), 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < x.rows; ++i) {
      const auto row = x.row(i);
      double z = w[d];
      for (std::size_t c = 0; c < d; ++c) z += w[c] * row[c];
      // BCE(y, sigmoid(z)) = log(1 + e^z) - y z, evaluated through e^-|z|.
      const double e = std::exp(-std::abs(z));
      total += std::max(z, 0.0) + std::log1p(e) - y[i] * z;
      const double r = (z >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e)) - y[i];
      for (std::size_t c = 0; c < d; ++c) grad[c] += r * row[c];
      grad[d] += r;
    }
    const double inv = 1.0 / static_cast<double>(x.rows);
    double reg = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      reg += w[c] * w[c];
      grad[c] = grad[c] * inv + l2 * w[c];
    }
    grad[d] *= inv;
    return total * inv + 0.5 * l2 * reg;
  }
};

}  // namespace

DiscriminatorModel train_discriminator(const Matrix& source, const Matrix& target,
                                       const TrainConfig& config, Representation rep) {
  if (source.cols != target.cols) {
    throw Error(ErrorKind::ShapeMismatch, "discriminator: source has " + std::to_string(source.cols) +
                                              " columns, target has " + std::to_string(target.cols));
  }
  if (source.rows == 0 || target.rows == 0) {
    throw Error(ErrorKind::InvalidArgument, "discriminator needs at least one source and one target row");
  }
  if (!(config.learning_rate > 0.0) || config.epochs < 1 || config.l2_penalty < 0.0) {
    throw Error(ErrorKind::InvalidArgument, "discriminator: invalid training configuration");
  }

  const std::size_t d = source.cols;
  DiscriminatorModel model;
  model.representation = rep;
  model.n_source = source.rows;
  model.n_target = target.rows;
  model.seed = config.seed;
  model.mean.assign(d, 0.0);
  model.scale.assign(d, 1.0);

  Problem problem;
  problem.x = vstack(source, target);
  problem.l2 = config.l2_penalty;
  problem.y.assign(problem.x.rows, 0.0);
  std::fill(problem.y.begin() + static_cast<std::ptrdiff_t>(source.rows), problem.y.end(), 1.0);

  const double rows = static_cast<double>(problem.x.rows);
  for (std::size_t i = 0; i < problem.x.rows; ++i)
    for (std::size_t c = 0; c < d; ++c) model.mean[c] += problem.x(i, c);
  for (double& m : model.mean) m /= rows;
  std::vector<double> var(d, 0.0);
  for (std::size_t i = 0; i < problem.x.rows; ++i)
    for (std::size_t c = 0; c < d; ++c) {
      const double diff = problem.x(i, c) - model.mean[c];
      var[c] += diff * diff;
    }
  for (std::size_t c = 0; c < d; ++c) {
    const double sd = std::sqrt(var[c] / rows);
    model.scale[c] = sd > 1e-12 ? sd : 1.0;
  }
  for (std::size_t i = 0; i < problem.x.rows; ++i)
    for (std::size_t c = 0; c < d; ++c) problem.x(i, c) = (problem.x(i, c) - model.mean[c]) / model.scale[c];

  std::vector<double> w(d + 1, 0.0);
  std::vector<double> grad(d + 1), trial(d + 1), trial_grad(d + 1);
  double loss = problem.evaluate(w, grad);
  if (!std::isfinite(loss)) throw Error(ErrorKind::NonFinite, "discriminator: non-finite loss");

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    double step = config.learning_rate;
    bool moved = false;
    for (int attempt = 0; attempt < 20; ++attempt) {
      for (std::size_t c = 0; c <= d; ++c) trial[c] = w[c] - step * grad[c];
      const double next = problem.evaluate(trial, trial_grad);
      if (!std::isfinite(next)) throw Error(ErrorKind::NonFinite, "discriminator: non-finite loss");
      if (next <= loss) {
        std::swap(w, trial);
        std::swap(grad, trial_grad);
        loss = next;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    model.loss_trace.push_back(loss);
    if (!moved) break;  // no descent step left: stationary up to rounding
  }
  model.weights = std::move(w);
  return model;
}

std::vector<double> predict_target_prob(const DiscriminatorModel& model, const Matrix& x) {
  const std::size_t d = model.dim();
  if (x.cols != d || model.weights.size() != d + 1) {
    throw Error(ErrorKind::ShapeMismatch, "discriminator expects " + std::to_string(d) + " columns, got " +
                                              std::to_string(x.cols));
  }
  std::vector<double> out(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) {
    const auto row = x.row(i);
    double z = model.weights[d];
    for (std::size_t c = 0; c < d; ++c) z += model.weights[c] * (row[c] - model.mean[c]) / model.scale[c];
    out[i] = std::clamp(sigmoid(z), kProbFloor, 1.0 - kProbFloor);
  }
  return out;
}

std::vector<double> density_ratio_weights(std::span<const double> probs, std::size_t n_source,
                                          std::size_t n_target) {
  if (n_target == 0) throw Error(ErrorKind::InvalidArgument, "density ratio with zero target count");
  const double ratio = static_cast<double>(n_source) / static_cast<double>(n_target);
  std::vector<double> w(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = std::clamp(probs[i], kProbFloor, 1.0 - kProbFloor);
    w[i] = ratio * p / (1.0 - p);
  }
  return w;
}

}  // namespace valbench
