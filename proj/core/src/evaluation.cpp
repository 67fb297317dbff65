#include "valbench/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "valbench/error.hpp"

namespace valbench {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double pick_accuracy(const ScoreTable& table, std::size_t checkpoint, std::span<const double> override_acc) {
  return override_acc.empty() ? table.accuracy(checkpoint) : override_acc[checkpoint];
}

void check_override(const ScoreTable& table, std::span<const double> override_acc) {
  if (!override_acc.empty() && override_acc.size() != table.checkpoints().size()) {
    throw Error(ErrorKind::InvalidArgument, "accuracy override length does not match checkpoint count");
  }
}

}  // namespace

ScoreTable::ScoreTable(std::vector<std::string> variants, std::vector<CheckpointKey> checkpoints)
    : variants_(std::move(variants)),
      checkpoints_(std::move(checkpoints)),
      oriented_(variants_.size() * checkpoints_.size(), kNaN),
      accuracy_(checkpoints_.size(), kNaN) {}

std::optional<std::size_t> ScoreTable::variant_index(const std::string& name) const {
  const auto it = std::find(variants_.begin(), variants_.end(), name);
  if (it == variants_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - variants_.begin());
}

void ScoreTable::add_variant(const std::string& name, std::span<const double> values) {
  if (values.size() != checkpoints_.size()) {
    throw Error(ErrorKind::InvalidArgument, "add_variant: one value per checkpoint required");
  }
  if (variant_index(name)) throw Error(ErrorKind::Duplicate, "variant " + name + " already present");
  const std::size_t old_v = variants_.size();
  std::vector<double> grown(checkpoints_.size() * (old_v + 1));
  for (std::size_t c = 0; c < checkpoints_.size(); ++c) {
    for (std::size_t v = 0; v < old_v; ++v) grown[c * (old_v + 1) + v] = oriented_[c * old_v + v];
    grown[c * (old_v + 1) + old_v] = values[c];
  }
  oriented_ = std::move(grown);
  variants_.push_back(name);
}

std::vector<std::string> ScoreTable::tasks() const {
  std::set<std::string> s;
  for (const auto& k : checkpoints_) s.insert(k.task_id);
  return {s.begin(), s.end()};
}

std::vector<std::string> ScoreTable::algorithms() const {
  std::set<std::string> s;
  for (const auto& k : checkpoints_) s.insert(k.algorithm);
  return {s.begin(), s.end()};
}

PairedSeries ScoreTable::series(std::size_t variant, const std::string& task,
                                const std::optional<std::string>& algorithm,
                                std::span<const double> accuracy_override) const {
  check_override(*this, accuracy_override);
  PairedSeries out;
  for (std::size_t c = 0; c < checkpoints_.size(); ++c) {
    const auto& key = checkpoints_[c];
    if (key.task_id != task || (algorithm && key.algorithm != *algorithm)) continue;
    const double s = score(c, variant);
    const double a = pick_accuracy(*this, c, accuracy_override);
    if (std::isnan(s) || std::isnan(a)) continue;
    out.scores.push_back(s);
    out.accuracies.push_back(a);
  }
  return out;
}

std::vector<RunSeries> ScoreTable::runs(std::size_t variant, const std::string& task, const std::string& algorithm,
                                        std::span<const double> accuracy_override) const {
  check_override(*this, accuracy_override);
  std::map<std::int64_t, std::vector<std::pair<std::int64_t, std::size_t>>> grouped;
  for (std::size_t c = 0; c < checkpoints_.size(); ++c) {
    const auto& key = checkpoints_[c];
    if (key.task_id == task && key.algorithm == algorithm) grouped[key.run_id].push_back({key.checkpoint_index, c});
  }
  std::vector<RunSeries> out;
  for (auto& [run_id, members] : grouped) {
    std::sort(members.begin(), members.end());
    RunSeries run;
    for (const auto& [index, c] : members) {
      const double s = score(c, variant);
      const double a = pick_accuracy(*this, c, accuracy_override);
      if (std::isnan(s) || std::isnan(a)) continue;
      run.scores.push_back(s);
      run.accuracies.push_back(a);
    }
    if (!run.scores.empty()) out.push_back(std::move(run));
  }
  return out;
}

void add_oracle_column(ScoreTable& table) {
  if (table.variant_index(kOracleVariant)) return;
  table.add_variant(kOracleVariant, table.accuracies());
}

VariantWsc evaluate_wsc(const ScoreTable& table, std::size_t variant, const std::optional<std::string>& algorithm,
                        std::span<const double> accuracy_override) {
  VariantWsc out;
  out.variant = table.variants().at(variant);
  std::vector<PairedSeries> per_task;
  for (const auto& task : table.tasks()) {
    auto s = table.series(variant, task, algorithm, accuracy_override);
    if (s.scores.empty()) continue;
    out.tasks.push_back(task);
    per_task.push_back(std::move(s));
  }
  if (per_task.empty()) {
    out.note = "no scored checkpoints";
    return out;
  }
  try {
    out.summary = avg_wsc_across_tasks(per_task);
  } catch (const Error& e) {
    out.note = e.what();
  }
  return out;
}

std::vector<GroupAatn> evaluate_aatn(const ScoreTable& table, std::size_t variant, const std::string& algorithm,
                                     std::size_t n, std::span<const double> accuracy_override) {
  std::vector<GroupAatn> out;
  for (const auto& task : table.tasks()) {
    const auto runs = table.runs(variant, task, algorithm, accuracy_override);
    if (runs.empty()) continue;
    out.push_back({task, aatn(runs, n)});
  }
  return out;
}

double mean_aatn(const ScoreTable& table, std::size_t variant, std::size_t n,
                 std::span<const double> accuracy_override) {
  double total = 0.0;
  std::size_t groups = 0;
  for (const auto& algorithm : table.algorithms()) {
    for (const auto& g : evaluate_aatn(table, variant, algorithm, n, accuracy_override)) {
      total += g.value;
      ++groups;
    }
  }
  if (groups == 0) throw Error(ErrorKind::DegenerateInput, "no runs to evaluate AATN on");
  return total / static_cast<double>(groups);
}

std::vector<NoisePoint> noise_resilience(const ScoreTable& table, const NoiseOptions& options) {
  std::vector<std::size_t> variants = options.variants;
  if (variants.empty()) {
    for (std::size_t v = 0; v < table.variants().size(); ++v)
      if (table.variants()[v] != kOracleVariant) variants.push_back(v);
  }
  if (variants.size() < 2) throw Error(ErrorKind::InvalidArgument, "noise_resilience needs >= 2 variants");
  for (double sigma : options.sigmas)
    if (!(sigma >= 0.0)) throw Error(ErrorKind::InvalidArgument, "noise sigma must be >= 0");

  const std::size_t n_ckpt = table.checkpoints().size();
  std::vector<double> percent(n_ckpt);
  for (std::size_t c = 0; c < n_ckpt; ++c) percent[c] = 100.0 * table.accuracy(c);

  using Aggregate = std::function<double(std::size_t, std::span<const double>)>;
  const std::string aatn_name = "AATN-" + std::to_string(options.aatn_n);
  const std::vector<std::pair<std::string, Aggregate>> metrics = {
      {"WSC",
       [&](std::size_t v, std::span<const double> acc) {
         const auto r = evaluate_wsc(table, v, std::nullopt, acc);
         if (!r.summary) throw Error(ErrorKind::DegenerateInput, r.note);
         return r.summary->mean;
       }},
      {aatn_name, [&](std::size_t v, std::span<const double> acc) { return mean_aatn(table, v, options.aatn_n, acc); }},
  };

  // Standard normal draws per seed, shared by every sigma.
  std::vector<std::vector<double>> draws;
  for (std::uint64_t seed : options.seeds) {
    std::seed_seq seq{static_cast<std::uint32_t>(options.master_seed), static_cast<std::uint32_t>(options.master_seed >> 32),
                      static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> z(n_ckpt);
    for (double& v : z) v = normal(rng);
    draws.push_back(std::move(z));
  }

  std::vector<NoisePoint> out;
  for (const auto& [metric, aggregate] : metrics) {
    std::vector<std::size_t> kept;
    std::vector<double> baseline;
    for (std::size_t v : variants) {
      try {
        baseline.push_back(aggregate(v, percent));
        kept.push_back(v);
      } catch (const Error&) {
      }
    }
    for (double sigma : options.sigmas) {
      NoisePoint point;
      point.sigma = sigma;
      point.metric = metric;
      std::vector<double> correlations;
      for (const auto& z : draws) {
        std::vector<double> noisy(n_ckpt);
        for (std::size_t c = 0; c < n_ckpt; ++c) noisy[c] = percent[c] + sigma * z[c];
        try {
          if (kept.size() < 2) throw Error(ErrorKind::DegenerateInput, "fewer than 2 rankable variants");
          std::vector<double> values;
          for (std::size_t v : kept) values.push_back(aggregate(v, noisy));
          const std::vector<double> unit(kept.size(), 1.0);
          correlations.push_back(weighted_pearson(average_ranks(baseline), average_ranks(values), unit));
        } catch (const Error&) {
          ++point.degenerate;
        }
      }
      point.seeds_used = correlations.size();
      if (!correlations.empty()) {
        point.mean = std::accumulate(correlations.begin(), correlations.end(), 0.0) /
                     static_cast<double>(correlations.size());
        if (correlations.size() > 1) {
          double ss = 0.0;
          for (double c : correlations) ss += (c - point.mean) * (c - point.mean);
          point.std = std::sqrt(ss / static_cast<double>(correlations.size() - 1));
        }
      }
      out.push_back(point);
    }
  }
  return out;
}

}  // namespace valbench
