#include "valbench/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <set>

#include "valbench/checkpoint.hpp"
#include "valbench/csv.hpp"
#include "valbench/engine.hpp"
#include "valbench/error.hpp"
#include "valbench/validators.hpp"

namespace valbench::cli {

namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string key_label(const CheckpointKey& key) {
  return key.task_id + "/run_" + std::to_string(key.run_id) + "/ckpt_" + std::to_string(key.checkpoint_index);
}

std::vector<std::string> key_fields(const CheckpointKey& key) {
  return {key.task_id, key.algorithm, std::to_string(key.run_id), std::to_string(key.checkpoint_index)};
}

CheckpointKey parse_key(const CsvTable& csv, const std::vector<std::string>& row, const std::string& context) {
  CheckpointKey key;
  key.task_id = row[csv.column("task_id")];
  key.algorithm = row[csv.column("algorithm")];
  key.run_id = parse_int(row[csv.column("run_id")], context);
  key.checkpoint_index = parse_int(row[csv.column("checkpoint_index")], context);
  return key;
}

bool is_directory_nonempty(const fs::path& dir) {
  return fs::is_directory(dir) && fs::directory_iterator(dir) != fs::directory_iterator();
}

ScoreTable load_table(const fs::path& scores, const std::optional<fs::path>& accuracy) {
  return load_score_table(scores, resolve_accuracy_csv(scores, accuracy));
}

// Mean of a variant's per-task AATN values for one algorithm.
std::optional<double> algorithm_aatn(const ScoreTable& table, std::size_t variant, const std::string& algorithm,
                                     std::size_t n) {
  const auto groups = evaluate_aatn(table, variant, algorithm, n);
  if (groups.empty()) return std::nullopt;
  double total = 0.0;
  for (const auto& g : groups) total += g.value;
  return total / static_cast<double>(groups.size());
}

std::size_t min_runs_per_group(const ScoreTable& table) {
  std::map<std::pair<std::string, std::string>, std::set<std::int64_t>> runs;
  for (const auto& key : table.checkpoints()) runs[{key.task_id, key.algorithm}].insert(key.run_id);
  std::size_t smallest = std::numeric_limits<std::size_t>::max();
  for (const auto& [group, ids] : runs) smallest = std::min(smallest, ids.size());
  return runs.empty() ? 0 : smallest;
}

// Variant names contain '|', which would split a Markdown table cell.
std::string md_cell(const std::string& text) {
  std::string out;
  for (char c : text) {
    if (c == '|') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

fs::path resolve_accuracy_csv(const fs::path& scores_csv, const std::optional<fs::path>& explicit_path) {
  if (explicit_path) return *explicit_path;
  return scores_csv.parent_path() / kAccuracyCsv;
}

ScoreTable load_score_table(const fs::path& scores_csv, const fs::path& accuracy_csv) {
  const CsvTable scores = read_csv(scores_csv);
  const std::size_t c_variant = scores.column("variant");
  const std::size_t c_oriented = scores.column("oriented");
  const std::size_t c_error = scores.column("error");

  std::map<CheckpointKey, std::size_t> key_index;
  std::vector<CheckpointKey> keys;
  std::map<std::string, std::size_t> variant_index;
  std::vector<std::string> variants;
  struct Cell {
    std::size_t key, variant;
    double value;
  };
  std::vector<Cell> cells;
  cells.reserve(scores.rows.size());

  for (std::size_t r = 0; r < scores.rows.size(); ++r) {
    const auto& row = scores.rows[r];
    const std::string context = scores_csv.string() + " row " + std::to_string(r + 2);
    const CheckpointKey key = parse_key(scores, row, context);
    auto [kit, new_key] = key_index.try_emplace(key, keys.size());
    if (new_key) keys.push_back(key);
    auto [vit, new_variant] = variant_index.try_emplace(row[c_variant], variants.size());
    if (new_variant) variants.push_back(row[c_variant]);
    const double value = row[c_error].empty() ? parse_double(row[c_oriented], context) : kNaN;
    cells.push_back({kit->second, vit->second, value});
  }
  if (keys.empty()) throw Error(ErrorKind::EmptyBenchmark, scores_csv.string() + " has no score rows");

  ScoreTable table(variants, keys);
  for (const auto& cell : cells) table.set_score(cell.key, cell.variant, cell.value);

  const CsvTable accuracy = read_csv(accuracy_csv);
  const std::size_t c_acc = accuracy.column("accuracy");
  std::vector<bool> seen(keys.size(), false);
  for (std::size_t r = 0; r < accuracy.rows.size(); ++r) {
    const auto& row = accuracy.rows[r];
    const std::string context = accuracy_csv.string() + " row " + std::to_string(r + 2);
    const auto it = key_index.find(parse_key(accuracy, row, context));
    if (it == key_index.end()) continue;  // accuracy for a checkpoint that was not scored
    table.set_accuracy(it->second, parse_double(row[c_acc], context));
    seen[it->second] = true;
  }
  for (std::size_t c = 0; c < keys.size(); ++c) {
    if (!seen[c]) {
      throw Error(ErrorKind::MissingFile,
                  accuracy_csv.string() + " has no accuracy for checkpoint " + key_label(keys[c]));
    }
  }
  return table;
}

int run_synth(const SynthArgs& args, std::ostream& out) {
  args.config.validate();
  if (is_directory_nonempty(args.out)) {
    if (!args.force) {
      throw Error(ErrorKind::InvalidArgument,
                  "output directory " + args.out.string() + " is not empty (pass --force to replace it)");
    }
    fs::remove_all(args.out);
  }
  const SynthSummary summary = generate_benchmark(args.config, args.out, args.jobs);
  out << "wrote " << summary.tasks << " tasks, " << summary.runs << " runs, " << summary.checkpoints
      << " checkpoints (" << summary.pathological << " pathological) to " << args.out.string() << '\n';
  return kExitOk;
}

int run_score(const ScoreArgs& args, std::ostream& out) {
  std::vector<ValidatorVariant> variants;
  if (args.variants.empty()) {
    variants = all_variants();
  } else {
    for (const auto& name : args.variants) {
      const auto v = find_variant(name);
      if (!v) throw Error(ErrorKind::InvalidArgument, "unknown variant '" + name + "'");
      variants.push_back(*v);
    }
  }

  const BenchmarkIndex index = scan_benchmark(args.root);
  ScoringOptions options;
  options.seed = args.seed;
  const auto scored = score_benchmark(index, variants, options, args.jobs);

  CsvTable scores{{"task_id", "algorithm", "run_id", "checkpoint_index", "variant", "raw", "oriented",
                   "degenerate", "error"},
                  {}};
  CsvTable accuracy{{"task_id", "algorithm", "run_id", "checkpoint_index", "accuracy"}, {}};
  std::size_t errors = 0;
  for (const auto& ckpt : scored) {
    for (std::size_t v = 0; v < variants.size(); ++v) {
      auto row = key_fields(ckpt.key);
      row.push_back(variants[v].name());
      if (ckpt.error) {
        row.insert(row.end(), {fixed6(kNaN), fixed6(kNaN), "0", sanitize_field(*ckpt.error)});
        ++errors;
      } else {
        const Score& s = ckpt.scores[v];
        const bool failed = !s.ok();
        errors += failed ? 1 : 0;
        row.insert(row.end(), {fixed6(failed ? kNaN : s.raw), fixed6(failed ? kNaN : s.oriented),
                               s.degenerate ? "1" : "0", failed ? sanitize_field(*s.error) : ""});
      }
      scores.rows.push_back(std::move(row));
    }
    if (ckpt.accuracy) {
      auto row = key_fields(ckpt.key);
      row.push_back(fixed6(*ckpt.accuracy));
      accuracy.rows.push_back(std::move(row));
    }
  }

  write_csv(args.out / kScoresCsv, scores);
  if (!accuracy.rows.empty()) write_csv(args.out / kAccuracyCsv, accuracy);
  out << "scored " << scored.size() << " checkpoints x " << variants.size() << " variants";
  if (errors) out << ", " << errors << " errored entries";
  out << "; wrote " << (args.out / kScoresCsv).string() << '\n';
  return errors ? kExitPartial : kExitOk;
}

int run_rank(const RankArgs& args, std::ostream& out) {
  ScoreTable table = load_table(args.scores, args.accuracy_csv);
  add_oracle_column(table);

  std::vector<std::optional<std::string>> scopes{std::nullopt};
  for (const auto& algorithm : table.algorithms()) scopes.emplace_back(algorithm);

  CsvTable per_task{{"scope", "task_id", "variant", "wsc", "status"}, {}};
  CsvTable summary{{"scope", "variant", "mean", "std", "tasks_used", "tasks_total", "note"}, {}};
  for (const auto& scope : scopes) {
    const std::string scope_name = scope.value_or(kAllScope);
    struct Ranked {
      std::string variant;
      double mean, std;
    };
    std::vector<Ranked> ranked;
    for (std::size_t v = 0; v < table.variants().size(); ++v) {
      const VariantWsc r = evaluate_wsc(table, v, scope);
      for (std::size_t t = 0; t < r.tasks.size(); ++t) {
        std::string wsc = "", status = r.note.empty() ? "ok" : r.note;
        if (r.summary) {
          const auto& task = r.summary->per_task[t];
          if (task.wsc) wsc = fixed6(*task.wsc);
          status = task.wsc ? "ok" : "excluded: " + task.note;
        }
        per_task.rows.push_back({scope_name, r.tasks[t], r.variant, wsc, sanitize_field(status)});
      }
      if (r.summary) {
        summary.rows.push_back({scope_name, r.variant, fixed6(r.summary->mean), fixed6(r.summary->std),
                                std::to_string(r.summary->tasks_used), std::to_string(r.tasks.size()),
                                sanitize_field(r.summary->single_task ? "single task" : "")});
        if (r.variant != kOracleVariant) ranked.push_back({r.variant, r.summary->mean, r.summary->std});
      } else {
        summary.rows.push_back({scope_name, r.variant, "", "", "0", std::to_string(r.tasks.size()),
                                sanitize_field(r.note)});
      }
    }

    std::stable_sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) { return a.mean > b.mean; });
    out << "[" << scope_name << "] top validators by average WSC\n";
    for (std::size_t i = 0; i < std::min<std::size_t>(ranked.size(), 5); ++i) {
      out << "  " << (i + 1) << ". " << ranked[i].variant << "  " << fixed6(ranked[i].mean) << " +- "
          << fixed6(ranked[i].std) << '\n';
    }
    if (scope && !ranked.empty()) {
      const std::size_t n = std::min(args.aatn_n, min_runs_per_group(table));
      const auto best = *table.variant_index(ranked.front().variant);
      const auto oracle = *table.variant_index(kOracleVariant);
      const auto best_aatn = algorithm_aatn(table, best, *scope, n);
      const auto oracle_aatn = algorithm_aatn(table, oracle, *scope, n);
      if (n > 0 && best_aatn && oracle_aatn) {
        out << "  AATN-" << n << " of best: " << fixed6(100.0 * *best_aatn)
            << ", Val-Oracle: " << fixed6(100.0 * (*best_aatn - *oracle_aatn)) << '\n';
      }
    }
  }

  write_csv(args.out / kWscPerTaskCsv, per_task);
  write_csv(args.out / kWscSummaryCsv, summary);
  out << "wrote " << (args.out / kWscSummaryCsv).string() << '\n';
  return kExitOk;
}

int run_aatn(const AatnArgs& args, std::ostream& out) {
  if (args.n == 0) throw Error(ErrorKind::InvalidArgument, "AATN needs n >= 1");
  ScoreTable table = load_table(args.scores, args.accuracy_csv);
  add_oracle_column(table);
  const std::size_t oracle = *table.variant_index(kOracleVariant);

  CsvTable csv{{"algorithm", "variant", "n", "aatn", "val_minus_oracle"}, {}};
  auto emit = [&](const std::string& scope, auto&& value_of) {
    const double oracle_value = value_of(oracle);
    for (std::size_t v = 0; v < table.variants().size(); ++v) {
      const double value = value_of(v);
      csv.rows.push_back({scope, table.variants()[v], std::to_string(args.n), fixed6(100.0 * value),
                          fixed6(100.0 * (value - oracle_value))});
    }
  };
  for (const auto& algorithm : table.algorithms()) {
    emit(algorithm, [&](std::size_t v) { return *algorithm_aatn(table, v, algorithm, args.n); });
  }
  emit(kAllScope, [&](std::size_t v) { return mean_aatn(table, v, args.n); });

  write_csv(args.out / kAatnCsv, csv);
  out << "wrote " << (args.out / kAatnCsv).string() << " (" << csv.rows.size() << " rows, n=" << args.n << ")\n";
  return kExitOk;
}

int run_noise(const NoiseArgs& args, std::ostream& out) {
  if (args.seeds == 0) throw Error(ErrorKind::InvalidArgument, "noise needs at least one seed");
  if (args.sigmas.empty()) throw Error(ErrorKind::InvalidArgument, "noise needs at least one sigma");
  const ScoreTable table = load_table(args.scores, args.accuracy_csv);

  NoiseOptions options;
  options.sigmas = args.sigmas;
  for (std::size_t s = 0; s < args.seeds; ++s) options.seeds.push_back(s);
  options.master_seed = args.seed;
  options.aatn_n = args.n;
  const auto points = noise_resilience(table, options);

  CsvTable csv{{"sigma", "metric", "mean_correlation", "std", "seeds_used", "degenerate"}, {}};
  for (const auto& p : points) {
    csv.rows.push_back({fixed6(p.sigma), p.metric, fixed6(p.mean), fixed6(p.std), std::to_string(p.seeds_used),
                        std::to_string(p.degenerate)});
    out << "sigma " << fixed6(p.sigma) << "  " << p.metric << "  " << fixed6(p.mean) << " +- " << fixed6(p.std)
        << '\n';
  }
  write_csv(args.out / kNoiseCsv, csv);
  out << "wrote " << (args.out / kNoiseCsv).string() << '\n';
  return kExitOk;
}

int run_report(const ReportArgs& args, std::ostream& out) {
  const CsvTable summary = read_csv(args.dir / kWscSummaryCsv);
  const CsvTable per_task = read_csv(args.dir / kWscPerTaskCsv);
  const CsvTable aatn = read_csv(args.dir / kAatnCsv);
  std::optional<CsvTable> noise;
  if (fs::exists(args.dir / kNoiseCsv)) noise = read_csv(args.dir / kNoiseCsv);

  struct Row {
    std::string scope, variant, mean, std, tasks;
    double value;
  };
  std::vector<Row> rows;
  {
    const auto c_scope = summary.column("scope"), c_var = summary.column("variant"), c_mean = summary.column("mean"),
               c_std = summary.column("std"), c_used = summary.column("tasks_used");
    for (const auto& r : summary.rows) {
      if (r[c_mean].empty()) continue;
      rows.push_back({r[c_scope], r[c_var], r[c_mean], r[c_std], r[c_used], parse_double(r[c_mean], "wsc_summary")});
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.value > b.value; });

  std::map<std::pair<std::string, std::string>, std::pair<std::string, std::string>> aatn_of;
  std::string aatn_n = "n";
  {
    const auto c_alg = aatn.column("algorithm"), c_var = aatn.column("variant"), c_val = aatn.column("aatn"),
               c_gap = aatn.column("val_minus_oracle"), c_n = aatn.column("n");
    for (const auto& r : aatn.rows) {
      aatn_of[{r[c_alg], r[c_var]}] = {r[c_val], r[c_gap]};
      aatn_n = r[c_n];
    }
  }

  const fs::path target = args.out.value_or(args.dir / kReportMd);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  std::ofstream md(target, std::ios::binary | std::ios::trunc);
  if (!md) throw Error(ErrorKind::Io, "cannot create " + target.string());

  md << "# Validator benchmark report\n\n";
  md << "## Validator ranking (all algorithms)\n\n";
  md << "| Rank | Validator | Avg WSC | Std | Tasks |\n|---:|---|---:|---:|---:|\n";
  std::size_t rank = 0;
  for (const auto& r : rows) {
    if (r.scope != kAllScope) continue;
    md << "| " << ++rank << " | " << md_cell(r.variant) << " | " << r.mean << " | " << r.std << " | " << r.tasks << " |\n";
  }

  md << "\n## Best validator per algorithm\n\n";
  md << "| Algorithm | Validator | Avg WSC | AATN-" << aatn_n << " | Val-Oracle |\n|---|---|---:|---:|---:|\n";
  std::set<std::string> done;
  for (const auto& r : rows) {
    if (r.scope == kAllScope || r.variant == kOracleVariant || !done.insert(r.scope).second) continue;
    const auto it = aatn_of.find({r.scope, r.variant});
    const std::string value = it == aatn_of.end() ? "n/a" : it->second.first;
    const std::string gap = it == aatn_of.end() ? "n/a" : it->second.second;
    md << "| " << md_cell(r.scope) << " | " << md_cell(r.variant) << " | " << r.mean << " | " << value << " | " << gap << " |\n";
  }

  md << "\n## Per-task WSC\n";
  {
    const auto c_scope = per_task.column("scope"), c_task = per_task.column("task_id"),
               c_var = per_task.column("variant"), c_wsc = per_task.column("wsc");
    std::map<std::string, std::vector<std::pair<std::string, std::string>>> by_task;
    for (const auto& r : per_task.rows) {
      if (r[c_scope] == kAllScope) by_task[r[c_task]].emplace_back(r[c_var], r[c_wsc]);
    }
    for (auto& [task, entries] : by_task) {
      std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
        const double x = a.second.empty() ? -1e300 : std::stod(a.second);
        const double y = b.second.empty() ? -1e300 : std::stod(b.second);
        return x > y;
      });
      md << "\n### " << task << "\n\n| Validator | WSC |\n|---|---:|\n";
      for (const auto& [variant, wsc] : entries) md << "| " << md_cell(variant) << " | " << (wsc.empty() ? "excluded" : wsc) << " |\n";
    }
  }

  if (noise) {
    md << "\n## Noise resilience\n\n| Sigma | Metric | Mean correlation | Std | Seeds |\n|---:|---|---:|---:|---:|\n";
    const auto c_sigma = noise->column("sigma"), c_metric = noise->column("metric"),
               c_mean = noise->column("mean_correlation"), c_std = noise->column("std"),
               c_seeds = noise->column("seeds_used");
    for (const auto& r : noise->rows) {
      md << "| " << r[c_sigma] << " | " << r[c_metric] << " | " << r[c_mean] << " | " << r[c_std] << " | "
         << r[c_seeds] << " |\n";
    }
  }
  if (!md) throw Error(ErrorKind::Io, "write failed on " + target.string());
  out << "wrote " << target.string() << '\n';
  return kExitOk;
}

}  // namespace valbench::cli
