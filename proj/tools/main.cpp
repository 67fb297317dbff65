#include <charconv>
#include <cstdlib>
#include <exception>
#include <iostream>
#include <string_view>

#include <CLI11.hpp>

#include "valbench/commands.hpp"
#include "valbench/error.hpp"

namespace {

using namespace valbench::cli;

CLI::Option* add_jobs(CLI::App* cmd, std::size_t& jobs) {
  return cmd->add_option("--jobs", jobs, "Worker threads (default: $VALBENCH_JOBS or 1)")->check(CLI::PositiveNumber);
}

// Applies VALBENCH_JOBS when --jobs is absent. False when the value is not a
// positive integer.
bool jobs_from_env(const CLI::Option* option, std::size_t& jobs) {
  const char* env = std::getenv("VALBENCH_JOBS");
  if (option->count() > 0 || env == nullptr) return true;
  const std::string_view text(env);
  std::size_t value = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size() || value == 0) return false;
  jobs = value;
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"valbench: label-free validator benchmark for domain adaptation checkpoints"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic checkpoint tree");
  synth_cmd->add_option("--out", synth.out, "Output root")->required();
  synth_cmd->add_option("--tasks", synth.config.num_tasks, "Number of tasks")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--runs", synth.config.runs_per_task, "Runs per task")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--checkpoints", synth.config.checkpoints_per_run, "Checkpoints per run")
      ->check(CLI::PositiveNumber);
  synth_cmd->add_option("--classes", synth.config.num_classes, "Number of classes")->check(CLI::Range(2u, 100000u));
  synth_cmd->add_option("--dim", synth.config.feature_dim, "Feature dimension")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--samples", synth.config.samples_per_split, "Rows per split")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--algorithms", synth.config.algorithms, "Algorithm names, assigned to runs round-robin")
      ->delimiter(',');
  synth_cmd->add_option("--domain-shift", synth.config.domain_shift, "Target feature offset");
  synth_cmd->add_flag("--collapse-clusters", synth.config.collapse_clusters, "Inject collapsed-feature checkpoints");
  synth_cmd->add_flag("--confident-wrong", synth.config.confident_wrong, "Inject confidently wrong checkpoints");
  synth_cmd->add_option("--pathology-fraction", synth.config.pathology_fraction, "Share of pathological checkpoints")
      ->check(CLI::Range(0.0, 1.0));
  synth_cmd->add_option("--seed", synth.config.seed, "Generator seed");
  synth_cmd->add_flag("--force", synth.force, "Replace a non-empty output directory");
  const auto* synth_jobs = add_jobs(synth_cmd, synth.jobs);

  ScoreArgs score;
  auto* score_cmd = app.add_subcommand("score", "Score every checkpoint with the validator variants");
  score_cmd->add_option("--root", score.root, "Checkpoint tree")->required();
  score_cmd->add_option("--out", score.out, "Output directory for scores.csv and accuracy.csv")->required();
  score_cmd->add_option("--variants", score.variants, "Comma-separated variant names (default: all)")
      ->delimiter(',');
  score_cmd->add_option("--seed", score.seed, "Seed for clustering");
  const auto* score_jobs = add_jobs(score_cmd, score.jobs);

  RankArgs rank;
  std::string rank_accuracy;
  auto* rank_cmd = app.add_subcommand("rank", "Weighted Spearman ranking of validators");
  rank_cmd->add_option("--scores", rank.scores, "scores.csv")->required()->check(CLI::ExistingFile);
  rank_cmd->add_option("--accuracy-csv", rank_accuracy, "Accuracy CSV (default: accuracy.csv beside scores)");
  rank_cmd->add_option("--out", rank.out, "Output directory")->required();
  rank_cmd->add_option("--n", rank.aatn_n, "AATN n for the summary")->check(CLI::PositiveNumber);

  AatnArgs aatn;
  std::string aatn_accuracy;
  auto* aatn_cmd = app.add_subcommand("aatn", "Average accuracy of the top-n runs per validator");
  aatn_cmd->add_option("--scores", aatn.scores, "scores.csv")->required()->check(CLI::ExistingFile);
  aatn_cmd->add_option("--accuracy-csv", aatn_accuracy, "Accuracy CSV (default: accuracy.csv beside scores)");
  aatn_cmd->add_option("--out", aatn.out, "Output directory")->required();
  aatn_cmd->add_option("--n", aatn.n, "Number of top runs")->check(CLI::PositiveNumber);

  NoiseArgs noise;
  std::string noise_accuracy;
  auto* noise_cmd = app.add_subcommand("noise", "Ranking stability under accuracy noise");
  noise_cmd->add_option("--scores", noise.scores, "scores.csv")->required()->check(CLI::ExistingFile);
  noise_cmd->add_option("--accuracy-csv", noise_accuracy, "Accuracy CSV (default: accuracy.csv beside scores)");
  noise_cmd->add_option("--out", noise.out, "Output directory")->required();
  noise_cmd->add_option("--sigmas", noise.sigmas, "Noise levels in accuracy points")
      ->delimiter(',')
      ->check(CLI::NonNegativeNumber);
  noise_cmd->add_option("--seeds", noise.seeds, "Number of noise seeds")->check(CLI::PositiveNumber);
  noise_cmd->add_option("--seed", noise.seed, "Master seed");
  noise_cmd->add_option("--n", noise.n, "AATN n")->check(CLI::PositiveNumber);

  ReportArgs report;
  std::string report_out;
  auto* report_cmd = app.add_subcommand("report", "Render report.md from rank/aatn/noise outputs");
  report_cmd->add_option("--dir", report.dir, "Directory with wsc_*.csv, aatn.csv, noise.csv")->required();
  report_cmd->add_option("--out", report_out, "Report path (default: <dir>/report.md)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  if ((*synth_cmd && !jobs_from_env(synth_jobs, synth.jobs)) || (*score_cmd && !jobs_from_env(score_jobs, score.jobs))) {
    std::cerr << "error: --jobs / VALBENCH_JOBS must be positive\n";
    return kExitUsage;
  }

  try {
    if (*synth_cmd) return run_synth(synth, std::cout);
    if (*score_cmd) return run_score(score, std::cout);
    if (*rank_cmd) {
      if (!rank_accuracy.empty()) rank.accuracy_csv = rank_accuracy;
      return run_rank(rank, std::cout);
    }
    if (*aatn_cmd) {
      if (!aatn_accuracy.empty()) aatn.accuracy_csv = aatn_accuracy;
      return run_aatn(aatn, std::cout);
    }
    if (*noise_cmd) {
      if (!noise_accuracy.empty()) noise.accuracy_csv = noise_accuracy;
      return run_noise(noise, std::cout);
    }
    if (*report_cmd) {
      if (!report_out.empty()) report.out = report_out;
      return run_report(report, std::cout);
    }
  } catch (const valbench::Error& e) {
    std::cerr << "error (" << valbench::to_string(e.kind()) << "): " << e.what() << '\n';
    return e.kind() == valbench::ErrorKind::InvalidArgument ? kExitUsage : kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}
