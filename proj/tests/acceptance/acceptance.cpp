// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (0 when everything passes).

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "valbench/clustering.hpp"
#include "valbench/engine.hpp"
#include "valbench/evaluation.hpp"
#include "valbench/metrics.hpp"
#include "valbench/synth.hpp"
#include "valbench/validators.hpp"

using namespace valbench;

namespace {

// Tolerances and budgets.
constexpr double kWscOracleTol = 1e-7;
constexpr double kWscOracleSeconds = 10.0;
constexpr double kSpearmanTol = 1e-9;
constexpr double kFigOneGap = 5.0;
constexpr double kKernelTol = 1e-9;
constexpr double kAmiTol = 1e-12;
constexpr double kNuclearRelTol = 1e-6;
constexpr double kNuclearSeconds = 30.0;
constexpr double kOracleWscTol = 1e-6;
constexpr double kRandomWscBound = 15.0;
constexpr double kPipelineSeconds = 300.0;
constexpr double kDecile = 0.1;
constexpr double kCollapseSndTol = 1e-3;
constexpr double kNoiseSigma = 5.0;
constexpr std::size_t kNoiseSeeds = 20;
constexpr std::size_t kAatnN = 5;
constexpr double kUnitMeanTol = 1e-12;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(const char* name, const std::function<Outcome()>& check) {
  Outcome out;
  try {
    out = check();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  failures += out.pass ? 0 : 1;
  std::printf("%s %s: %s\n", out.pass ? "PASS" : "FAIL", name, out.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), format, args...);
  return buf;
}

bool constant(const std::vector<double>& v) {
  return std::adjacent_find(v.begin(), v.end(), std::not_equal_to<>()) == v.end();
}

PairedSeries random_series(std::mt19937_64& rng, bool ties) {
  std::uniform_int_distribution<std::size_t> len(3, 64);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (;;) {
    const std::size_t n = len(rng);
    std::uniform_int_distribution<int> grid(0, static_cast<int>(std::max<std::size_t>(2, n / 4)));
    PairedSeries s;
    for (std::size_t i = 0; i < n; ++i) {
      s.scores.push_back(ties ? grid(rng) * 0.25 : u(rng));
      s.accuracies.push_back(ties ? grid(rng) * 0.01 : u(rng));
    }
    if (!constant(s.scores) && !constant(s.accuracies)) return s;
  }
}

double svd_nuclear_norm(const Matrix& m) {
  Eigen::MatrixXd e(m.rows, m.cols);
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) e(i, j) = m(i, j);
  return Eigen::JacobiSVD<Eigen::MatrixXd>(e).singularValues().sum();
}

// Scored default benchmark shared by the end-to-end and noise criteria.
struct Benchmark {
  ScoreTable table;
  double seconds = 0.0;
};

Benchmark score_default_benchmark() {
  const auto start = Clock::now();
  fixtures::TempDir tmp("valbench-acceptance");
  SynthConfig cfg;  // 3 tasks x 10 runs x 20 checkpoints, seed 7
  generate_benchmark(cfg, tmp.path(), 1);
  const auto index = scan_benchmark(tmp.path());
  const auto& variants = all_variants();
  const auto scored = score_benchmark(index, variants, {}, 1);
  Benchmark b{to_score_table(scored, variants), 0.0};
  b.seconds = seconds_since(start);
  return b;
}

}  // namespace

int main() {
  report("wsc-oracle-equivalence", [] {
    const auto start = Clock::now();
    std::mt19937_64 rng(20240601);
    std::bernoulli_distribution with_ties(0.3);
    double worst = 0.0;
    int tied = 0;
    for (int i = 0; i < 200; ++i) {
      const bool ties = with_ties(rng);
      tied += ties;
      const auto s = random_series(rng, ties);
      worst = std::max(worst, std::abs(weighted_spearman(s) - oracle::wsc(s.scores, s.accuracies)));
    }
    const double t = seconds_since(start);
    return Outcome{worst <= kWscOracleTol && t < kWscOracleSeconds,
                   fmt("200 cases (%d with ties), max |diff| %.3g (tol %.0e), %.2f s", tied, worst, kWscOracleTol, t)};
  });

  report("spearman-reduction", [] {
    std::mt19937_64 rng(7);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const auto s = random_series(rng, i % 2 == 0);
      const std::vector<double> ones(s.scores.size(), 1.0);
      const double pipeline =
          100.0 * weighted_pearson(weighted_ranks(s.scores, ones), weighted_ranks(s.accuracies, ones), ones);
      worst = std::max(worst, std::abs(pipeline - oracle::spearman(s.scores, s.accuracies)));
      worst = std::max(worst, std::abs(pipeline - spearman(s.scores, s.accuracies)));
    }
    return Outcome{worst <= kSpearmanTol, fmt("100 cases, max |diff| %.3g (tol %.0e)", worst, kSpearmanTol)};
  });

  report("fig1-top-heavy-property", [] {
    std::vector<double> v(20), a(20);
    for (int i = 0; i < 20; ++i) {
      v[i] = i;
      a[i] = i + 1;
    }
    const double mono_wsc = weighted_spearman({v, a}), mono_sp = spearman(v, a);
    a[19] = 0.0;  // highest score, lowest accuracy
    const double wsc = weighted_spearman({v, a}), sp = spearman(v, a);
    const bool pass = sp - wsc >= kFigOneGap && std::abs(mono_wsc - 100) < 1e-9 && std::abs(mono_sp - 100) < 1e-9;
    return Outcome{pass, fmt("WSC %.4f vs Spearman %.4f (gap %.4f, need >= %.0f); monotone %.6f / %.6f", wsc, sp,
                             sp - wsc, kFigOneGap, mono_wsc, mono_sp)};
  });

  report("kernel-fixtures", [] {
    const std::vector<double> uniform(4, 0.25);
    const double h = shannon_entropy(uniform);
    const double nn = nuclear_norm(Matrix(4, 2, {1, 0, 0, 1, 1, 0, 0, 1}));
    std::mt19937_64 rng(3);
    const double snd2 = snd_from_matrix(fixtures::random_matrix(2, 6, rng), 0.05);
    const std::vector<std::uint32_t> same{0, 1, 1, 2, 2, 2, 0};
    const double ami_same = adjusted_mutual_information(same, same);
    double worst_sym = 0.0;
    std::uniform_int_distribution<std::uint32_t> label(0, 4);
    for (int i = 0; i < 100; ++i) {
      std::vector<std::uint32_t> x(60), y(60);
      for (std::size_t k = 0; k < x.size(); ++k) {
        x[k] = label(rng);
        y[k] = (x[k] + (label(rng) == 0 ? 1u : 0u)) % 5;
      }
      std::vector<std::uint32_t> perm{3, 0, 4, 1, 2}, xp(x.size());
      std::transform(x.begin(), x.end(), xp.begin(), [&](std::uint32_t l) { return perm[l]; });
      const double base = adjusted_mutual_information(x, y);
      worst_sym = std::max({worst_sym, std::abs(base - adjusted_mutual_information(y, x)),
                            std::abs(base - adjusted_mutual_information(xp, y))});
    }
    const bool pass = std::abs(h - std::log(4.0)) <= kKernelTol && std::abs(nn - std::sqrt(8.0)) <= kKernelTol &&
                      snd2 == 0.0 && std::abs(ami_same - 1.0) <= kAmiTol && worst_sym <= kAmiTol;
    return Outcome{pass, fmt("H=%.12f nuc=%.12f SND(N=2)=%g AMI(a,a)=%.15f sym/perm max %.3g", h, nn, snd2, ami_same,
                             worst_sym)};
  });

  report("nuclear-norm-oracle", [] {
    const auto start = Clock::now();
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<std::size_t> rows(1, 512), cols(1, 64);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const std::size_t r = i == 0 ? 512 : rows(rng), c = i == 0 ? 64 : cols(rng);
      const Matrix m = fixtures::random_matrix(r, c, rng);
      const double expected = svd_nuclear_norm(m);
      worst = std::max(worst, std::abs(nuclear_norm(m) - expected) / expected);
    }
    const double t = seconds_since(start);
    return Outcome{worst <= kNuclearRelTol && t < kNuclearSeconds,
                   fmt("100 matrices up to 512x64, max rel diff %.3g (tol %.0e), %.2f s", worst, kNuclearRelTol, t)};
  });

  Benchmark bench;
  report("end-to-end-synthetic", [&] {
    bench = score_default_benchmark();
    ScoreTable table = bench.table;
    std::vector<double> negated(table.accuracies()), random(table.accuracies().size());
    for (double& v : negated) v = -v;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (double& v : random) v = u(rng);
    add_oracle_column(table);
    table.add_variant("NegatedOracle", negated);
    table.add_variant("Random", random);

    const double oracle_wsc = evaluate_wsc(table, *table.variant_index(kOracleVariant)).summary->mean;
    const double negated_wsc = evaluate_wsc(table, *table.variant_index("NegatedOracle")).summary->mean;
    const double random_wsc = evaluate_wsc(table, *table.variant_index("Random")).summary->mean;
    const double oracle_aatn = mean_aatn(table, *table.variant_index(kOracleVariant), kAatnN);
    std::size_t dominated = 0;
    for (std::size_t v = 0; v < all_variants().size(); ++v) dominated += oracle_aatn >= mean_aatn(table, v, kAatnN);

    const bool oracle_ok = std::abs(oracle_wsc - 100.0) <= kOracleWscTol;
    const bool negated_ok = std::abs(negated_wsc + 100.0) <= kOracleWscTol;
    const bool random_ok = std::abs(random_wsc) < kRandomWscBound;
    const bool aatn_ok = dominated == all_variants().size();
    const bool time_ok = bench.seconds < kPipelineSeconds;
    return Outcome{oracle_ok && negated_ok && random_ok && aatn_ok && time_ok,
                   fmt("oracle %.6f [%s]; negated oracle %.6f, target -100 [%s]; random %.3f [%s]; AATN-5 oracle "
                       "%.4f dominates %zu/35 [%s]; pipeline %.1f s [%s]",
                       oracle_wsc, oracle_ok ? "ok" : "off", negated_wsc, negated_ok ? "ok" : "off", random_wsc,
                       random_ok ? "ok" : "off", oracle_aatn, dominated, aatn_ok ? "ok" : "off", bench.seconds,
                       time_ok ? "ok" : "slow")};
  });

  report("pathology-narratives", [] {
    SynthConfig cfg;
    cfg.confident_wrong = true;
    cfg.collapse_clusters = true;
    const std::vector<ValidatorVariant> variants{*find_variant("Entropy|Target"), *find_variant("SND|features|tau=0.05"),
                                                 *find_variant("SND|features|tau=0.1"),
                                                 *find_variant("SND|features|tau=0.5")};
    std::vector<double> entropy, accuracy;
    std::vector<Pathology> kind;
    double worst_snd = 0.0;
    for (std::size_t t = 0; t < cfg.num_tasks; ++t)
      for (std::size_t r = 0; r < cfg.runs_per_task; ++r)
        for (std::size_t i = 0; i < cfg.checkpoints_per_run; ++i) {
          const auto rec = generate_checkpoint(cfg, t, r, i);
          const Pathology p = checkpoint_pathology(cfg, t, r, i);
          const auto scores = score_all(rec, std::span(variants).first(p == Pathology::CollapseClusters ? 4 : 1));
          entropy.push_back(scores[0].oriented);
          accuracy.push_back(oracle_accuracy(rec));
          kind.push_back(p);
          if (p == Pathology::CollapseClusters) {
            const double ln = std::log(static_cast<double>(rec.target.size() - 1));
            for (std::size_t v = 1; v < 4; ++v) worst_snd = std::max(worst_snd, std::abs(scores[v].raw - ln));
          }
        }
    // Share of checkpoints strictly above (entropy) or strictly below (accuracy).
    auto share = [&](const std::vector<double>& xs, double x, bool above) {
      std::size_t k = 0;
      for (double y : xs) k += above ? y > x : y < x;
      return static_cast<double>(k) / static_cast<double>(xs.size());
    };
    std::size_t wrong = 0, wrong_ok = 0, collapsed = 0;
    for (std::size_t i = 0; i < kind.size(); ++i) {
      if (kind[i] == Pathology::CollapseClusters) ++collapsed;
      if (kind[i] != Pathology::ConfidentWrong) continue;
      ++wrong;
      wrong_ok += share(entropy, entropy[i], true) < kDecile && share(accuracy, accuracy[i], false) < kDecile;
    }
    const bool pass = wrong > 0 && wrong_ok == wrong && collapsed > 0 && worst_snd <= kCollapseSndTol;
    return Outcome{pass, fmt("confident-wrong in top/bottom decile %zu/%zu; collapsed %zu with max |SND - ln(N-1)| "
                             "%.3g (tol %.0e)",
                             wrong_ok, wrong, collapsed, worst_snd, kCollapseSndTol)};
  });

  report("noise-resilience", [&] {
    if (bench.table.checkpoints().empty()) bench = score_default_benchmark();
    NoiseOptions options;
    options.sigmas = {0.0, kNoiseSigma};
    for (std::uint64_t s = 0; s < kNoiseSeeds; ++s) options.seeds.push_back(s);
    options.master_seed = 7;
    options.aatn_n = kAatnN;
    std::map<std::pair<double, std::string>, double> mean;
    for (const auto& p : noise_resilience(bench.table, options)) mean[{p.sigma, p.metric}] = p.mean;
    const std::string aatn = "AATN-" + std::to_string(kAatnN);
    const double wsc0 = mean[{0.0, "WSC"}], aatn0 = mean[{0.0, aatn}];
    const double wsc5 = mean[{kNoiseSigma, "WSC"}], aatn5 = mean[{kNoiseSigma, aatn}];
    const bool pass = wsc0 == 1.0 && aatn0 == 1.0 && wsc5 >= aatn5;
    return Outcome{pass, fmt("sigma=0: WSC %.6f, %s %.6f; sigma=5 over %zu seeds: WSC %.4f vs %s %.4f", wsc0,
                             aatn.c_str(), aatn0, kNoiseSeeds, wsc5, aatn.c_str(), aatn5)};
  });

  report("variant-registry", [] {
    const auto& all = all_variants();
    std::set<std::string> names;
    std::map<Family, int> counts;
    for (const auto& v : all) {
      names.insert(v.name());
      ++counts[v.family];
    }
    const std::vector<Family> order{Family::Accuracy, Family::BNM,  Family::ClassAMI, Family::ClassSS,
                                    Family::DEV,      Family::DEVN, Family::Entropy,  Family::SND};
    const std::vector<int> expected{2, 5, 4, 4, 3, 3, 5, 9};
    std::string split;
    bool counts_ok = true;
    for (std::size_t i = 0; i < order.size(); ++i) {
      split += (i ? "/" : "") + std::to_string(counts[order[i]]);
      counts_ok = counts_ok && counts[order[i]] == expected[i];
    }
    return Outcome{all.size() == 35 && names.size() == 35 && counts_ok,
                   fmt("%zu variants, %zu unique names, split %s", all.size(), names.size(), split.c_str())};
  });

  report("dev-devn-weights", [] {
    std::mt19937_64 rng(5);
    std::lognormal_distribution<double> ln(0.0, 1.5);
    std::uniform_int_distribution<std::size_t> len(1, 500);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      std::vector<double> w(len(rng));
      for (double& x : w) x = ln(rng);
      const auto norm = max_normalize_weights(w);
      worst = std::max(worst, std::abs(std::accumulate(norm.begin(), norm.end(), 0.0) / norm.size() - 1.0));
    }
    const std::vector<double> losses{0.4, 1.1, 2.3, 0.2}, flat(4, 1.0);
    const auto degenerate = dev_estimate(losses, flat);
    const double mean_loss = (0.4 + 1.1 + 2.3 + 0.2) / 4;
    const bool branch_ok = degenerate.degenerate && std::abs(degenerate.score - mean_loss) < 1e-15;
    return Outcome{worst <= kUnitMeanTol && branch_ok,
                   fmt("max |mean(W_max) - 1| %.3g (tol %.0e); Var(W)=0 gives %.6f (mean L %.6f), flag %s", worst,
                       kUnitMeanTol, degenerate.score, mean_loss, degenerate.degenerate ? "set" : "clear")};
  });

  std::printf("%d criteria failed\n", failures);
  return failures;
}
