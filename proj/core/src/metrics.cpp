#include "valbench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "valbench/error.hpp"
#include "valbench/kernels.hpp"

namespace valbench {

namespace {

void require_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw Error(ErrorKind::InvalidArgument, std::string(what) + ": lengths differ");
}

bool has_two_distinct(std::span<const double> v) {
  return std::any_of(v.begin(), v.end(), [&](double x) { return x != v.front(); });
}

void require_finite(std::span<const double> v, const char* what) {
  for (double x : v)
    if (!std::isfinite(x)) throw Error(ErrorKind::NonFinite, std::string(what) + ": non-finite entry");
}

std::vector<std::size_t> sorted_order(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  return order;
}

}  // namespace

std::vector<double> quadratic_weights(const PairedSeries& series) {
  require_same_length(series.scores.size(), series.accuracies.size(), "quadratic_weights");
  const auto rv = dense_rank(series.scores);
  const auto ra = dense_rank(series.accuracies);
  const std::size_t n = rv.size();
  if (n == 0) return {};
  const double max_v = static_cast<double>(*std::max_element(rv.begin(), rv.end()));
  const double max_a = static_cast<double>(*std::max_element(ra.begin(), ra.end()));
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double m = std::max(static_cast<double>(rv[i]) / max_v, static_cast<double>(ra[i]) / max_a);
    w[i] = m * m;
  }
  return w;
}

std::vector<double> weighted_ranks(std::span<const double> values, std::span<const double> weights) {
  require_same_length(values.size(), weights.size(), "weighted_ranks");
  const auto order = sorted_order(values);
  std::vector<double> ranks(values.size());
  double below = 0.0;
  for (std::size_t start = 0; start < order.size();) {
    std::size_t end = start;
    double group = 0.0;
    while (end < order.size() && values[order[end]] == values[order[start]]) group += weights[order[end++]];
    const double t = static_cast<double>(end - start);
    const double rank = below + (t + 1.0) / 2.0 * (group / t);
    for (std::size_t k = start; k < end; ++k) ranks[order[k]] = rank;
    below += group;
    start = end;
  }
  return ranks;
}

double weighted_pearson(std::span<const double> x, std::span<const double> y, std::span<const double> w) {
  require_same_length(x.size(), y.size(), "weighted_pearson");
  require_same_length(x.size(), w.size(), "weighted_pearson");
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  if (!(sw > 0.0)) throw Error(ErrorKind::DegenerateInput, "weighted_pearson: weights sum to zero");
  const double mx = sx / sw;
  const double my = sy / sw;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += w[i] * dx * dy;
    sxx += w[i] * dx * dx;
    syy += w[i] * dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) throw Error(ErrorKind::DegenerateInput, "zero weighted variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double weighted_spearman(const PairedSeries& series) {
  require_same_length(series.scores.size(), series.accuracies.size(), "weighted_spearman");
  if (series.scores.size() < 3) throw Error(ErrorKind::InvalidArgument, "weighted_spearman needs N >= 3");
  require_finite(series.scores, "weighted_spearman scores");
  require_finite(series.accuracies, "weighted_spearman accuracies");
  if (!has_two_distinct(series.scores) || !has_two_distinct(series.accuracies)) {
    throw Error(ErrorKind::DegenerateInput, "weighted_spearman: a series is constant");
  }
  const auto w = quadratic_weights(series);
  const auto x = weighted_ranks(series.scores, w);
  const auto y = weighted_ranks(series.accuracies, w);
  return 100.0 * weighted_pearson(x, y, w);
}

std::vector<double> average_ranks(std::span<const double> values) {
  const std::vector<double> unit(values.size(), 1.0);
  return weighted_ranks(values, unit);
}

double spearman(std::span<const double> x, std::span<const double> y) {
  require_same_length(x.size(), y.size(), "spearman");
  if (x.size() < 3) throw Error(ErrorKind::InvalidArgument, "spearman needs N >= 3");
  require_finite(x, "spearman");
  require_finite(y, "spearman");
  if (!has_two_distinct(x) || !has_two_distinct(y)) {
    throw Error(ErrorKind::DegenerateInput, "spearman: a series is constant");
  }
  const std::vector<double> unit(x.size(), 1.0);
  return 100.0 * weighted_pearson(average_ranks(x), average_ranks(y), unit);
}

CrossTaskSummary avg_wsc_across_tasks(std::span<const PairedSeries> per_task) {
  if (per_task.empty()) throw Error(ErrorKind::InvalidArgument, "avg_wsc_across_tasks needs T >= 1");
  CrossTaskSummary out;
  std::vector<double> values;
  for (const auto& series : per_task) {
    TaskCorrelation tc;
    try {
      tc.wsc = weighted_spearman(series);
      values.push_back(*tc.wsc);
    } catch (const Error& e) {
      tc.note = e.what();
    }
    out.per_task.push_back(std::move(tc));
  }
  if (values.empty()) throw Error(ErrorKind::DegenerateInput, "every task is degenerate");
  out.tasks_used = values.size();
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() == 1) {
    out.single_task = true;
    out.std = 0.0;
  } else {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return out;
}

double aatn(std::span<const RunSeries> runs, std::size_t n) {
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "aatn: n must be >= 1");
  if (n > runs.size()) {
    throw Error(ErrorKind::InvalidArgument,
                "aatn: n = " + std::to_string(n) + " exceeds " + std::to_string(runs.size()) + " runs");
  }
  std::vector<double> best_score(runs.size());
  std::vector<double> best_acc(runs.size());
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const auto& run = runs[r];
    if (run.scores.empty()) throw Error(ErrorKind::InvalidArgument, "aatn: empty run");
    require_same_length(run.scores.size(), run.accuracies.size(), "aatn");
    const std::size_t s = argmax(std::span<const double>(run.scores));
    best_score[r] = run.scores[s];
    best_acc[r] = run.accuracies[s];
  }
  std::vector<std::size_t> order(runs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return best_score[a] > best_score[b]; });
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += best_acc[order[i]];
  return total / static_cast<double>(n);
}

}  // namespace valbench
