#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "valbench/evaluation.hpp"
#include "valbench/synth.hpp"

namespace valbench::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitPartial = 3;  // score: some variant entries errored

// Fixed output file names.
inline constexpr const char* kScoresCsv = "scores.csv";
inline constexpr const char* kAccuracyCsv = "accuracy.csv";
inline constexpr const char* kWscPerTaskCsv = "wsc_per_task.csv";
inline constexpr const char* kWscSummaryCsv = "wsc_summary.csv";
inline constexpr const char* kAatnCsv = "aatn.csv";
inline constexpr const char* kNoiseCsv = "noise.csv";
inline constexpr const char* kReportMd = "report.md";

/// Scope label for metrics pooled over every algorithm.
inline constexpr const char* kAllScope = "all";

struct SynthArgs {
  SynthConfig config;
  std::filesystem::path out;
  bool force = false;
  std::size_t jobs = 1;
};

struct ScoreArgs {
  std::filesystem::path root;
  std::filesystem::path out;
  std::vector<std::string> variants;  // empty = all 35
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
};

struct RankArgs {
  std::filesystem::path scores;
  std::optional<std::filesystem::path> accuracy_csv;  // default: beside scores
  std::filesystem::path out;
  std::size_t aatn_n = 5;  // used for the stdout summary only
};

struct AatnArgs {
  std::filesystem::path scores;
  std::optional<std::filesystem::path> accuracy_csv;
  std::filesystem::path out;
  std::size_t n = 5;
};

struct NoiseArgs {
  std::filesystem::path scores;
  std::optional<std::filesystem::path> accuracy_csv;
  std::filesystem::path out;
  std::vector<double> sigmas = {0.0, 1.0, 2.0, 5.0, 10.0};
  std::size_t seeds = 20;
  std::uint64_t seed = 0;
  std::size_t n = 5;
};

struct ReportArgs {
  std::filesystem::path dir;  // holds the rank/aatn/noise outputs
  std::optional<std::filesystem::path> out;  // default: <dir>/report.md
};

int run_synth(const SynthArgs& args, std::ostream& out);
int run_score(const ScoreArgs& args, std::ostream& out);
int run_rank(const RankArgs& args, std::ostream& out);
int run_aatn(const AatnArgs& args, std::ostream& out);
int run_noise(const NoiseArgs& args, std::ostream& out);
int run_report(const ReportArgs& args, std::ostream& out);

/// Rebuilds a score table from scores.csv and an accuracy CSV. Checkpoints
/// and variants keep their first-appearance order.
ScoreTable load_score_table(const std::filesystem::path& scores_csv, const std::filesystem::path& accuracy_csv);

/// `explicit_path` or accuracy.csv next to `scores_csv`.
std::filesystem::path resolve_accuracy_csv(const std::filesystem::path& scores_csv,
                                           const std::optional<std::filesystem::path>& explicit_path);

}  // namespace valbench::cli
