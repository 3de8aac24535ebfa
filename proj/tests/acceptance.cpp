// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "stanceprobe/config.hpp"
#include "stanceprobe/pipeline.hpp"
#include "stanceprobe/pmi.hpp"
#include "stanceprobe/stats.hpp"
#include "stanceprobe/vocabfilter.hpp"
#include "synthetic.hpp"

using namespace stanceprobe;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Outcome gradient_correctness() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const auto inst = oracle::random_loss_instance(rng, 20, 10);
    worst = std::max(worst, oracle::max_gradient_rel_error(inst));
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-4 && secs < 30.0, "max rel error " + fmt("%.3g", worst) + ", " + fmt("%.2f", secs) + " s"};
}

Outcome normalization() {
  std::mt19937_64 rng(2025);
  std::uniform_int_distribution<std::size_t> nv(1, 40);
  std::uniform_real_distribution<double> scale(0.01, 20.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto p = synthetic::random_params(rng, synthetic::lemma_names(nv(rng)), scale(rng));
    for (std::size_t g = 0; g < lvm::kGenders; ++g)
      for (auto s : kAllSentiments) {
        double sum = 0.0;
        for (double x : lvm::word_dist(p, s, g)) sum += x;
        worst = std::max(worst, std::fabs(sum - 1.0));
      }
    for (std::size_t w = 0; w < p.size(); ++w) {
      const auto post = lvm::posterior_sentiment(p, w);
      worst = std::max(worst, std::fabs(post[0] + post[1] + post[2] - 1.0));
    }
  }
  return {worst <= 1e-9, "max |sum - 1| " + fmt("%.3g", worst)};
}

Outcome kl_behaviour() {
  std::mt19937_64 rng(2026);
  double min_kl = INFINITY;
  for (int i = 0; i < 1000; ++i) {
    const auto inst = oracle::random_loss_instance(rng, 20, 10);
    min_kl = std::min(min_kl, lvm::kl_term(inst.params, inst.data, inst.lexicon));
  }
  synthetic::PlantedConfig pc;
  pc.vocab_size = 30;
  pc.planted = 3;
  pc.male_planted = 2;
  const auto planted = synthetic::make_planted(pc);
  std::map<std::string, lexfusion::Triple> shifted;
  for (const auto& [w, a] : planted.lexicon.entries()) shifted[w] = {a[2] + 1, a[0] + 1, a[1] + 1};
  const lexfusion::FusedLexicon lex(shifted);
  auto trained_kl = [&](double beta) {
    lvm::TrainConfig c;
    c.beta = beta;
    return lvm::kl_term(lvm::train(planted.data, lex, c).params, planted.data, lex);
  };
  const double low = trained_kl(1e-3);
  const double high = trained_kl(100.0);
  return {min_kl >= 0.0 && high < low, "min KL " + fmt("%.3g", min_kl) + "; KL(beta=1e-3) " + fmt("%.4g", low) +
                                           ", KL(beta=100) " + fmt("%.4g", high)};
}

Outcome planted_recovery() {
  const auto t0 = Clock::now();
  const auto planted = synthetic::make_planted({});
  lvm::TrainConfig base;
  base.seed = 1;
  const auto grid =
      lvm::grid_train(planted.data, planted.lexicon, lvm::kDefaultAlphaGrid, lvm::kDefaultBetaGrid, base, 1);
  std::vector<lvm::ModelParams> models;
  for (const auto& r : grid) models.push_back(r.params);
  const auto ranking = lvm::deviation_ranking(models, GenderClass::FEMALE, SentimentClass::POS, 10);
  const std::set<std::string> truth(planted.planted.begin(), planted.planted.end());
  std::size_t hits = 0;
  for (const auto& item : ranking.items) hits += truth.count(item.lemma);
  const double secs = seconds_since(t0);
  return {grid.size() == 40 && hits >= 8 && secs < 300.0,
          std::to_string(hits) + "/10 planted in top-10 over " + std::to_string(grid.size()) + " runs, " +
              fmt("%.2f", secs) + " s"};
}

Outcome pmi_oracle() {
  std::mt19937_64 rng(2027);
  std::uniform_int_distribution<int> n_words(1, 5);
  std::uniform_int_distribution<int> count(0, 12);
  double worst = 0.0;
  std::size_t cells = 0;
  for (int rep = 0; rep < 500; ++rep) {
    pmi::CountTable t;
    std::map<std::pair<GenderClass, std::string>, double> raw;
    const int nw = n_words(rng);
    for (auto g : kAllGenders)
      for (int w = 0; w < nw; ++w) {
        const int c = count(rng);
        if (c == 0) continue;
        t.add(g, "w" + std::to_string(w), c);
        raw[{g, "w" + std::to_string(w)}] = c;
      }
    if (raw.empty()) continue;
    const auto got = pmi::compute_pmi(t, 0.0);
    if (got.size() != raw.size()) return {false, "cell count differs from the oracle"};
    for (const auto& [cell, c] : raw) {
      worst = std::max(worst, std::fabs(got.at(cell) - oracle::pmi(raw, cell.first, cell.second)));
      ++cells;
    }
  }
  return {worst <= 1e-12, std::to_string(cells) + " cells, max |diff| " + fmt("%.3g", worst)};
}

Outcome anova_oracle() {
  std::mt19937_64 rng(2028);
  std::uniform_int_distribution<int> levels(2, 4);
  std::uniform_int_distribution<int> reps(1, 3);
  std::normal_distribution<double> noise(0.0, 0.1);
  double worst = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const int la = levels(rng), lb = levels(rng);
    std::vector<stats::Observation> obs;
    for (int a = 0; a < la; ++a)
      for (int b = 0; b < lb; ++b)
        for (int r = reps(rng); r > 0; --r) {
          stats::Observation o;
          o.value = 0.5 + 0.1 * a - 0.05 * b + noise(rng);
          o.factors = {{"arch", "a" + std::to_string(a)}, {"lang", "l" + std::to_string(b)}};
          obs.push_back(o);
        }
    // Guarantee residual degrees of freedom.
    obs.push_back(obs.front());
    obs.back().value += 0.01;
    const auto result = stats::anova_ols(obs, {"arch", "lang"});
    const auto design = stats::dummy_design(obs, {"arch", "lang"});
    std::vector<double> y;
    for (const auto& o : obs) y.push_back(o.value);
    const auto b = oracle::normal_equations(design.rows, y);
    for (std::size_t i = 0; i < b.size(); ++i)
      worst = std::max(worst, std::fabs(b[i] - result.coefficients[i].estimate));
  }
  std::vector<stats::Observation> binary;
  for (double v : {0.2, 0.3, 0.4}) binary.push_back({v, {{"g", "fem"}}});
  for (double v : {0.6, 0.7}) binary.push_back({v, {{"g", "masc"}}});
  const auto r = stats::anova_ols(binary, {"g"});
  const double mean_err = std::max(std::fabs(r.coefficients[0].estimate - 0.3),
                                   std::fabs(r.coefficients[0].estimate + r.coefficients[1].estimate - 0.65));
  return {worst < 1e-9 && mean_err < 1e-12,
          "max |coef diff| " + fmt("%.3g", worst) + ", group-mean error " + fmt("%.3g", mean_err)};
}

Outcome welch_reference() {
  struct Case {
    std::vector<double> a, b;
    double t, p;
  };
  // Reference values from an independent Welch implementation.
  const std::vector<Case> cases = {
      {{1, 2, 3}, {4, 5, 6}, -3.6742346141747673, 0.021311641128756727},
      {{0.41, 0.38, 0.45, 0.52, 0.36, 0.44}, {0.58, 0.49, 0.61, 0.55}, -3.775740651414468, 0.006738264307177155},
      {{12.1, 9.8, 11.4, 10.2, 13.9, 8.7, 10.5}, {9.1, 9.4, 8.8, 9.9, 9.0}, 2.537506900893224, 0.038686352311157975},
  };
  double worst = 0.0;
  for (const auto& c : cases) {
    const auto r = stats::welch_test(c.a, c.b);
    worst = std::max({worst, std::fabs(r.t - c.t), std::fabs(r.p - c.p)});
  }
  const std::vector<double> p = {0.01, 0.0166, 0.0167, 0.02, 0.05 / 3.0, 0.049};
  const auto flags = stats::bonferroni(p, 3);
  bool rule = true;
  for (std::size_t i = 0; i < p.size(); ++i) rule = rule && flags[i] == (p[i] < 0.05 / 3.0);
  rule = rule && flags == std::vector<bool>{true, true, false, false, false, false};
  return {worst < 1e-3 && rule, "max |diff| " + fmt("%.3g", worst) + (rule ? ", p<0.05/3 rule holds" : ", rule broken")};
}

Outcome protocol_constants() {
  const auto s = pipeline::Settings::from_config(config::KeyValueConfig::parse_string("[inputs]\nprobes = \"/p\"\n"));
  const bool grids = s.alpha_grid == std::vector<double>{0.0, 1e-5, 1e-4, 1e-3, 1e-2} &&
                     s.beta_grid == std::vector<double>{1e-5, 1e-4, 1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0};
  const bool top_k = vocabfilter::default_top_k("en", PosClass::ADJ) == 20 &&
                     vocabfilter::default_top_k("en", PosClass::VERB) == 20 &&
                     vocabfilter::default_top_k("es", PosClass::ADJ) == 100 &&
                     vocabfilter::default_top_k("es", PosClass::VERB) == 20 &&
                     vocabfilter::default_top_k("zh", PosClass::ADJ) == 100;
  return {grids && top_k, std::string(grids ? "grids ok" : "grids differ") + ", " + (top_k ? "top-k ok" : "top-k differs")};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Relative paths of rank tables, stats CSVs and SVGs under `dir`.
std::vector<std::string> compared_outputs(const fs::path& dir) {
  std::vector<std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), dir).generic_string();
    const auto name = e.path().filename().string();
    if (rel.rfind("rank/", 0) == 0 || name.rfind("stats_", 0) == 0 || e.path().extension() == ".svg")
      out.push_back(rel);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Outcome end_to_end() {
  const fs::path data = STANCEPROBE_DATA_FIXTURE;
  const auto root = fs::temp_directory_path() / "stanceprobe_acceptance_e2e";
  fs::remove_all(root);
  fs::create_directories(root);
  const std::string cli = STANCEPROBE_CLI;
  double slowest = 0.0;
  auto run = [&](const std::string& args) {
    const auto t0 = Clock::now();
    const std::string cmd = cli + " --log-level error " + args;
    const int status = std::system(cmd.c_str());
    slowest = std::max(slowest, seconds_since(t0));
    return status == 0;
  };
  const auto cfg = (data / "config.toml").string();
  if (!run("--config " + cfg + " --out-dir " + (root / "run1").string() + " run-all"))
    return {false, "first run-all failed"};
  if (!run("--config " + cfg + " --out-dir " + (root / "run2").string() + " run-all"))
    return {false, "second run-all failed"};
  if (!run("--out-dir " + (root / "replay").string() + " run-all --manifest " + (root / "run1" / "manifest.json").string()))
    return {false, "manifest replay failed"};
  const auto files = compared_outputs(root / "run1");
  std::size_t ranks = 0, stats_files = 0, svgs = 0;
  for (const auto& f : files) {
    ranks += f.rfind("rank/", 0) == 0;
    stats_files += f.rfind("stats_", 0) == 0;
    svgs += f.size() > 4 && f.substr(f.size() - 4) == ".svg";
  }
  if (ranks == 0 || stats_files == 0 || svgs == 0) return {false, "run produced no rank, stats or SVG files"};
  if (compared_outputs(root / "run2") != files || compared_outputs(root / "replay") != files)
    return {false, "runs produced different file sets"};
  for (const auto& f : files) {
    const auto a = slurp(root / "run1" / f);
    if (a != slurp(root / "run2" / f) || a != slurp(root / "replay" / f)) return {false, "differs: " + f};
  }
  fs::remove_all(root);
  return {slowest < 600.0, std::to_string(files.size()) + " files identical across 2 runs and replay (" +
                               std::to_string(ranks) + " rank, " + std::to_string(stats_files) + " stats, " +
                               std::to_string(svgs) + " svg), slowest run " + fmt("%.1f", slowest) + " s"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"gradient-correctness", gradient_correctness},
      {"normalization", normalization},
      {"kl-nonnegative-and-regularization", kl_behaviour},
      {"planted-bias-recovery", planted_recovery},
      {"pmi-oracle", pmi_oracle},
      {"anova-oracle", anova_oracle},
      {"welch-reference-and-bonferroni", welch_reference},
      {"protocol-constants", protocol_constants},
      {"end-to-end-determinism", end_to_end},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
