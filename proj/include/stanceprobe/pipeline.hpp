#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stanceprobe/config.hpp"
#include "stanceprobe/corpus.hpp"
#include "stanceprobe/lexfusion.hpp"
#include "stanceprobe/lvm.hpp"
#include "stanceprobe/pmi.hpp"
#include "stanceprobe/report.hpp"
#include "stanceprobe/stats.hpp"
#include "stanceprobe/vocabfilter.hpp"

namespace stanceprobe::pipeline {

struct LexiconSource {
  std::filesystem::path path;
  lexfusion::Scale scale = lexfusion::Scale::BINARY;
};

/// Everything `run-all` needs, read from a key/value config. See README for
/// the key reference.
struct Settings {
  std::uint64_t seed = 0;
  std::filesystem::path politicians;  // optional
  std::filesystem::path probes;
  std::vector<std::string> languages;  // empty: every language in the probe file
  std::vector<PosClass> pos_classes{PosClass::ADJ, PosClass::VERB};
  vocabfilter::SlotMode slot_mode = vocabfilter::SlotMode::MERGE;
  std::optional<std::size_t> top_k;  // overrides the per-language default
  std::map<std::string, std::vector<std::filesystem::path>> treebanks;
  std::map<std::string, std::vector<LexiconSource>> lexicons;
  std::map<std::string, std::filesystem::path> supersenses;
  lexfusion::FusionStrategy fusion_strategy = lexfusion::FusionStrategy::POOLED;
  lexfusion::FusionConfig fusion;
  pmi::Weighting pmi_weighting = pmi::Weighting::UNIT;
  double pmi_smoothing = 0.5;
  double pmi_min_count = 5.0;
  lvm::TrainConfig train;
  std::vector<double> alpha_grid = lvm::kDefaultAlphaGrid;
  std::vector<double> beta_grid = lvm::kDefaultBetaGrid;
  lvm::Averaging averaging = lvm::Averaging::TAU;
  unsigned threads = 1;
  std::size_t rank_k = 10;
  std::size_t sentiment_top_k = 100;
  std::size_t bonferroni_m = 3;
  std::map<std::string, std::map<std::string, std::string>> model_factors;  // model -> factor -> level
  std::vector<std::string> anova_factors{"architecture", "size", "language"};
  std::map<std::string, std::string> reference_levels;

  static Settings from_config(const config::KeyValueConfig& cfg);
};

/// Copy of `cfg` with every input path made absolute against its base
/// directory, so the canonical text alone locates the inputs.
config::KeyValueConfig resolve_paths(const config::KeyValueConfig& cfg);

/// Every input file the settings refer to, in a stable order.
std::vector<std::filesystem::path> input_files(const Settings& settings);

/// Drops tables of entities that are not retained records or have no name in
/// the table's language; the record's gender replaces the table's.
corpus::ProbeSet restrict_to_records(const corpus::ProbeSet& probe,
                                     const std::vector<corpus::PoliticianRecord>& records);

/// Sentiment frequency of the top-`top_k` (gender, sentiment) deviations of
/// each grid run taken on its own. Runs with no lexicon-covered lemma are
/// skipped.
std::vector<double> grid_frequencies(const std::vector<lvm::TrainResult>& grid,
                                     const lexfusion::FusedLexicon& lexicon, GenderClass gender,
                                     SentimentClass sentiment, std::size_t top_k);

/// Masculine vs feminine comparison for one sentiment of one model.
struct SentimentStat {
  std::string language;
  PosClass pos = PosClass::ADJ;
  std::string model;
  SentimentClass sentiment = SentimentClass::POS;
  std::size_t n_masc = 0;
  std::size_t n_fem = 0;
  double mean_masc = 0.0;
  double mean_fem = 0.0;
  stats::TTest test;
  bool significant = false;
};

/// One row per sentiment: Welch test between the per-run masculine and
/// feminine frequencies, flagged under a Bonferroni correction for `m` tests.
/// A side with fewer than two runs gets t = p = NaN and no flag.
std::vector<SentimentStat> sentiment_stats(const std::vector<lvm::TrainResult>& grid,
                                           const lexfusion::FusedLexicon& lexicon,
                                           const std::string& language, PosClass pos,
                                           const std::string& model, std::size_t top_k,
                                           std::size_t bonferroni_m);

void write_stats_csv(const std::vector<SentimentStat>& rows, std::ostream& out);
std::vector<SentimentStat> read_stats_csv(std::istream& in);

/// Masculine and feminine marker per row of `pos` / `sentiment`.
std::vector<report::SentimentPoint> plot_points(const std::vector<SentimentStat>& rows, PosClass pos,
                                                SentimentClass sentiment);

/// Directory named by STANCEPROBE_CACHE, if set and non-empty.
std::optional<std::filesystem::path> cache_dir_from_env();

/// grid_train, memoised on disk under `cache_dir` keyed by a digest of the
/// data, lexicon, grids and training configuration.
std::vector<lvm::TrainResult> cached_grid_train(const vocabfilter::FilteredProbeSet& data,
                                                const lexfusion::FusedLexicon& lexicon,
                                                const std::vector<double>& alpha_grid,
                                                const std::vector<double>& beta_grid,
                                                const lvm::TrainConfig& config, unsigned threads,
                                                const std::optional<std::filesystem::path>& cache_dir);

/// Treebank lexicon for `language`, unioned over its configured files.
vocabfilter::PosLexicon load_pos_lexicon(const Settings& settings, const std::string& language);

/// Fused sentiment lexicon for `language`, lemmatized with `pos_lexicon`.
lexfusion::FusedLexicon load_fused_lexicon(const Settings& settings, const std::string& language,
                                           const vocabfilter::PosLexicon& pos_lexicon);

struct RunOptions {
  std::filesystem::path out_dir;
  std::optional<std::filesystem::path> cache_dir;
};

/// Full analysis: filtering, lexicon fusion, PMI, grid training, rankings,
/// significance tests, supersenses, ANOVA, plots and the manifest, all under
/// `options.out_dir`. Returns the manifest that was written.
report::RunManifest run_all(const config::KeyValueConfig& cfg, const RunOptions& options);

/// Re-runs from a manifest after checking the config hash and every input
/// digest.
report::RunManifest replay(const report::RunManifest& manifest, const RunOptions& options);

/// File-name fragment for a POS class: "adj", "verb".
std::string pos_slug(PosClass pos);

}  // namespace stanceprobe::pipeline
