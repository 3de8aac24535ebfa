// Command-line front end. Every subcommand reads plain files and writes its
// result under --out-dir (or to --output when given).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "stanceprobe/config.hpp"
#include "stanceprobe/corpus.hpp"
#include "stanceprobe/lexfusion.hpp"
#include "stanceprobe/lvm.hpp"
#include "stanceprobe/pipeline.hpp"
#include "stanceprobe/pmi.hpp"
#include "stanceprobe/report.hpp"
#include "stanceprobe/stats.hpp"
#include "stanceprobe/text.hpp"
#include "stanceprobe/vocabfilter.hpp"

namespace fs = std::filesystem;
using namespace stanceprobe;

namespace {

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  std::string log_level = "warn";

  std::optional<config::KeyValueConfig> config() const {
    if (config_path.empty()) return std::nullopt;
    auto cfg = config::KeyValueConfig::load(config_path);
    if (seed) cfg.set_scalar("seed", std::to_string(*seed));
    return cfg;
  }
  std::optional<pipeline::Settings> settings() const {
    auto cfg = config();
    if (!cfg) return std::nullopt;
    return pipeline::Settings::from_config(*cfg);
  }
  fs::path output(const std::string& explicit_path, const std::string& default_name) const {
    return explicit_path.empty() ? fs::path(out_dir) / default_name : fs::path(explicit_path);
  }
};

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

template <typename Writer>
void emit(const fs::path& path, Writer&& writer) {
  std::ostringstream out;
  writer(out);
  report::write_atomically(path, out.str());
  std::cout << "wrote " << path.string() << '\n';
}

template <typename T, typename Parse>
T parse_or_throw(const std::string& what, const std::string& text, Parse parse) {
  auto v = parse(text);
  if (!v) throw Error("unknown " + what + ": " + text);
  return *v;
}

std::vector<lvm::TrainResult> read_grids(const std::vector<std::string>& paths) {
  std::vector<lvm::TrainResult> runs;
  for (const auto& p : paths) {
    auto in = open_in(p);
    auto grid = lvm::read_grid(in);
    runs.insert(runs.end(), std::make_move_iterator(grid.begin()), std::make_move_iterator(grid.end()));
  }
  if (runs.empty()) throw Error("no trained runs in the given grid files");
  return runs;
}

// --- ingest -----------------------------------------------------------------

struct IngestArgs {
  std::string politicians;
  std::string probes;
};

void cmd_ingest(const Globals& g, const IngestArgs& a) {
  auto politicians = a.politicians;
  auto probes = a.probes;
  if (auto s = g.settings()) {
    if (politicians.empty()) politicians = s->politicians.string();
    if (probes.empty()) probes = s->probes.string();
  }
  if (politicians.empty() && probes.empty()) throw Error("ingest needs --politicians and/or --probes");
  if (!politicians.empty()) {
    auto in = open_in(politicians);
    const auto parsed = corpus::parse_politicians(in);
    const auto counts = parsed.gender_counts();
    std::cout << "politicians: " << parsed.input_count << " input, " << parsed.records.size()
              << " retained, " << parsed.excluded_count << " excluded";
    for (auto gender : kAllGenders)
      std::cout << ", " << to_string(gender) << ' ' << (counts.contains(gender) ? counts.at(gender) : 0);
    std::cout << '\n';
    emit(g.output("", "politicians.jsonl"),
         [&](std::ostream& out) { corpus::write_politicians(parsed.records, out); });
  }
  if (!probes.empty()) {
    const auto set = corpus::read_probe_set(fs::path(probes));
    std::cout << "probe tables: " << set.size() << " (" << set.models().size() << " models, "
              << set.languages().size() << " languages)\n";
    emit(g.output("", "probes.jsonl"), [&](std::ostream& out) { corpus::write_probe_set(set, out); });
  }
}

// --- filter -----------------------------------------------------------------

struct FilterArgs {
  std::string probes;
  std::vector<std::string> treebanks;
  std::string language;
  std::string pos = "ADJ";
  std::size_t top_k = 0;
  std::string slot_mode = "merge";
  std::string output;
};

vocabfilter::PosLexicon lexicon_from(const Globals& g, const std::vector<std::string>& treebanks,
                                     const std::string& language) {
  if (treebanks.empty()) {
    auto s = g.settings();
    if (!s) throw Error("no treebank given (use --treebank or --config)");
    return pipeline::load_pos_lexicon(*s, language);
  }
  vocabfilter::PosLexiconBuilder builder(language);
  for (const auto& p : treebanks) {
    auto in = open_in(p);
    builder.add_conllu(in);
  }
  return builder.build();
}

void cmd_filter(const Globals& g, const FilterArgs& a) {
  auto probes = a.probes;
  if (probes.empty()) {
    auto s = g.settings();
    if (!s) throw Error("no probe file given (use --probes or --config)");
    probes = s->probes.string();
  }
  const auto pos = parse_or_throw<PosClass>("POS class", a.pos, parse_pos_class);
  vocabfilter::SlotMode mode = vocabfilter::SlotMode::MERGE;
  if (a.slot_mode == "prefix") mode = vocabfilter::SlotMode::PREFIX_ONLY;
  else if (a.slot_mode == "suffix") mode = vocabfilter::SlotMode::SUFFIX_ONLY;
  else if (a.slot_mode != "merge") throw Error("unknown slot mode: " + a.slot_mode);
  const auto lex = lexicon_from(g, a.treebanks, a.language);
  const auto set = corpus::read_probe_set(fs::path(probes));
  const auto k = a.top_k ? a.top_k : vocabfilter::default_top_k(a.language, pos);
  const auto filtered = vocabfilter::filter_probe(set, lex, pos, k, mode);
  std::cout << "kept " << filtered.entities.size() << " entity tables, dropped "
            << filtered.report.entities_dropped << "; " << filtered.report.tokens_unknown
            << " unknown and " << filtered.report.tokens_wrong_pos << " off-class tokens\n";
  emit(g.output(a.output, "filtered_" + a.language + "_" + pipeline::pos_slug(pos) + ".json"),
       [&](std::ostream& out) { vocabfilter::write_filtered(filtered, out); });
}

// --- fuse-lex ---------------------------------------------------------------

struct FuseArgs {
  std::vector<std::string> lexica;  // path:scale
  std::vector<std::string> treebanks;
  std::string language;
  std::string strategy = "pooled";
  double view_weight = 1.0;
  std::size_t epochs = 300;
  std::string output;
};

void cmd_fuse(const Globals& g, const FuseArgs& a) {
  const auto settings = g.settings();
  std::optional<vocabfilter::PosLexicon> lemmatizer;
  if (!a.treebanks.empty() || (settings && settings->treebanks.contains(a.language)))
    lemmatizer = lexicon_from(g, a.treebanks, a.language);

  std::vector<lexfusion::RawLexicon> views;
  if (a.lexica.empty()) {
    if (!settings || !settings->lexicons.contains(a.language))
      throw Error("no lexicon given (use --lexicon PATH:SCALE or --config)");
    for (const auto& src : settings->lexicons.at(a.language))
      views.push_back(lexfusion::ingest_lexicon(src.path, src.scale, a.language,
                                                lemmatizer ? &*lemmatizer : nullptr));
  }
  for (const auto& spec : a.lexica) {
    const auto colon = spec.rfind(':');
    if (colon == std::string::npos) throw Error("expected PATH:SCALE, got " + spec);
    const auto scale =
        parse_or_throw<lexfusion::Scale>("scale", spec.substr(colon + 1), lexfusion::parse_scale);
    views.push_back(lexfusion::ingest_lexicon(fs::path(spec.substr(0, colon)), scale, a.language,
                                              lemmatizer ? &*lemmatizer : nullptr));
  }
  lexfusion::FusionConfig config;
  config.view_weight = a.view_weight;
  config.epochs = a.epochs;
  config.seed = g.seed.value_or(settings ? settings->seed : 0);
  lexfusion::FusionStrategy strategy;
  if (a.strategy == "pooled") strategy = lexfusion::FusionStrategy::POOLED;
  else if (a.strategy == "variational") strategy = lexfusion::FusionStrategy::VARIATIONAL;
  else throw Error("unknown fusion strategy: " + a.strategy);
  const auto fused = lexfusion::fuse(views, strategy, config);
  std::cout << "fused " << views.size() << " views into " << fused.size() << " words\n";
  emit(g.output(a.output, "lexicon_" + a.language + ".json"),
       [&](std::ostream& out) { lexfusion::write_fused(fused, out); });
}

// --- pmi --------------------------------------------------------------------

struct PmiArgs {
  std::string filtered;
  std::string model;
  std::string weighting = "unit";
  double smoothing_k = 0.5;
  double min_count = 5.0;
  std::string output;
};

vocabfilter::FilteredProbeSet load_filtered(const std::string& path, const std::string& model) {
  auto in = open_in(path);
  auto data = vocabfilter::read_filtered(in);
  if (!model.empty()) data = data.for_model(model);
  if (data.entities.empty()) throw Error("no entities in " + path + (model.empty() ? "" : " for model " + model));
  return data;
}

void cmd_pmi(const Globals& g, const PmiArgs& a) {
  const auto data = load_filtered(a.filtered, a.model);
  pmi::Weighting w;
  if (a.weighting == "unit") w = pmi::Weighting::UNIT;
  else if (a.weighting == "prob") w = pmi::Weighting::PROB;
  else throw Error("unknown weighting: " + a.weighting);
  const auto counts = pmi::cooccurrence_counts(data, w);
  const auto scores = pmi::compute_pmi(counts, a.smoothing_k);
  emit(g.output(a.output, "pmi.csv"),
       [&](std::ostream& out) { pmi::write_pmi_csv(counts, scores, a.min_count, out); });
}

// --- train ------------------------------------------------------------------

struct TrainArgs {
  std::string filtered;
  std::string lexicon;
  std::string model;
  std::vector<double> alpha_grid = lvm::kDefaultAlphaGrid;
  std::vector<double> beta_grid = lvm::kDefaultBetaGrid;
  std::size_t max_steps = 2000;
  double learning_rate = 0.05;
  unsigned threads = 1;
  std::string output;
};

void cmd_train(const Globals& g, const TrainArgs& a) {
  const auto data = load_filtered(a.filtered, a.model);
  if (a.model.empty() && data.models().size() > 1)
    throw Error("the filtered file holds several models; pick one with --model");
  auto in = open_in(a.lexicon);
  const auto lexicon = lexfusion::read_fused(in);
  lvm::TrainConfig config;
  if (auto s = g.settings()) config = s->train;
  config.max_steps = a.max_steps;
  config.learning_rate = a.learning_rate;
  if (g.seed) config.seed = *g.seed;
  const auto grid = pipeline::cached_grid_train(data, lexicon, a.alpha_grid, a.beta_grid, config,
                                                a.threads, pipeline::cache_dir_from_env());
  std::size_t converged = 0;
  for (const auto& r : grid) converged += r.converged ? 1 : 0;
  std::cout << "trained " << grid.size() << " runs (" << converged << " converged)\n";
  emit(g.output(a.output, "grid.json"), [&](std::ostream& out) { lvm::write_grid(grid, config, out); });
}

// --- rank -------------------------------------------------------------------

struct RankArgs {
  std::vector<std::string> grids;
  std::size_t k = 10;
  std::string averaging = "tau";
  std::string output;
};

void cmd_rank(const Globals& g, const RankArgs& a) {
  const auto runs = read_grids(a.grids);
  std::vector<const lvm::ModelParams*> params;
  for (const auto& r : runs) params.push_back(&r.params);
  lvm::Averaging avg;
  if (a.averaging == "tau") avg = lvm::Averaging::TAU;
  else if (a.averaging == "eta") avg = lvm::Averaging::ETA;
  else throw Error("unknown averaging: " + a.averaging);
  std::vector<lvm::DeviationRanking> rankings;
  for (auto gender : {GenderClass::MALE, GenderClass::FEMALE})
    for (auto s : kAllSentiments) rankings.push_back(lvm::deviation_ranking(params, gender, s, a.k, avg));
  emit(g.output(a.output, "rank.csv"),
       [&](std::ostream& out) { out << report::emit_rank_table(rankings, a.k); });
}

// --- stats ------------------------------------------------------------------

struct StatsArgs {
  std::vector<std::string> grids;
  std::string lexicon;
  std::string language;
  std::string pos = "ADJ";
  std::string model;
  std::size_t top_k = 100;
  std::size_t bonferroni_m = 3;
  std::string supersenses;
  std::string output;
};

void cmd_stats(const Globals& g, const StatsArgs& a) {
  const auto runs = read_grids(a.grids);
  auto in = open_in(a.lexicon);
  const auto lexicon = lexfusion::read_fused(in);
  const auto pos = parse_or_throw<PosClass>("POS class", a.pos, parse_pos_class);
  const auto rows =
      pipeline::sentiment_stats(runs, lexicon, a.language, pos, a.model, a.top_k, a.bonferroni_m);
  emit(g.output(a.output, "stats.csv"), [&](std::ostream& out) { pipeline::write_stats_csv(rows, out); });
  if (!a.supersenses.empty()) {
    auto ss_in = open_in(a.supersenses);
    const auto map = stats::read_supersense_map(ss_in);
    std::vector<const lvm::ModelParams*> params;
    for (const auto& r : runs) params.push_back(&r.params);
    emit(fs::path(g.out_dir) / "supersense.csv", [&](std::ostream& out) {
      out << "gender,sentiment,supersense,frequency\n";
      for (auto gender : {GenderClass::MALE, GenderClass::FEMALE})
        for (auto s : kAllSentiments)
          for (const auto& [cls, f] :
               stats::supersense_frequency(lvm::deviation_ranking(params, gender, s, a.top_k), map))
            out << table_label(gender) << ',' << to_string(s) << ',' << text::csv_escape(cls) << ','
                << format_double(f) << '\n';
    });
  }
}

// --- anova ------------------------------------------------------------------

struct AnovaArgs {
  std::string observations;
  std::vector<std::string> factors;
  std::vector<std::string> references;  // factor=level
  std::string output;
};

// CSV with a `value` column and one column per factor.
std::vector<stats::Observation> read_observations(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty observation file", 1);
  const auto header = text::split(line, ',');
  std::size_t value_col = header.size();
  for (std::size_t i = 0; i < header.size(); ++i)
    if (text::trim(header[i]) == "value") value_col = i;
  if (value_col == header.size()) throw ParseError("no 'value' column", 1);
  std::vector<stats::Observation> obs;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto cols = text::split(line, ',');
    if (cols.size() != header.size()) throw ParseError("wrong number of columns", line_no);
    stats::Observation o;
    char* end = nullptr;
    o.value = std::strtod(cols[value_col].c_str(), &end);
    if (cols[value_col].empty() || *end != '\0') throw ParseError("bad value '" + cols[value_col] + "'", line_no);
    for (std::size_t i = 0; i < cols.size(); ++i)
      if (i != value_col) o.factors[std::string(text::trim(header[i]))] = std::string(text::trim(cols[i]));
    obs.push_back(std::move(o));
  }
  return obs;
}

void cmd_anova(const Globals& g, const AnovaArgs& a) {
  auto in = open_in(a.observations);
  const auto obs = read_observations(in);
  std::map<std::string, std::string> refs;
  for (const auto& r : a.references) {
    const auto eq = r.find('=');
    if (eq == std::string::npos) throw Error("expected FACTOR=LEVEL, got " + r);
    refs[r.substr(0, eq)] = r.substr(eq + 1);
  }
  const auto result = stats::anova_ols(obs, a.factors, refs);
  emit(g.output(a.output, "anova.csv"), [&](std::ostream& out) { stats::write_anova_csv(result, out); });
}

// --- report -----------------------------------------------------------------

struct ReportArgs {
  std::vector<std::string> stats_files;
};

void cmd_report(const Globals& g, const ReportArgs& a) {
  std::vector<pipeline::SentimentStat> rows;
  for (const auto& p : a.stats_files) {
    auto in = open_in(p);
    auto more = pipeline::read_stats_csv(in);
    rows.insert(rows.end(), more.begin(), more.end());
  }
  for (auto pos : {PosClass::ADJ, PosClass::VERB})
    for (auto s : kAllSentiments) {
      const auto points = pipeline::plot_points(rows, pos, s);
      if (points.empty()) continue;
      const auto path = fs::path(g.out_dir) /
                        ("plot_" + pipeline::pos_slug(pos) + "_" + std::string(to_string(s)) + ".svg");
      report::emit_sentiment_plot(points, path,
                                  std::string(to_string(pos)) + " " + std::string(to_string(s)) +
                                      " frequency of top-deviation words");
      std::cout << "wrote " << path.string() << '\n';
    }
}

// --- run-all ----------------------------------------------------------------

struct RunAllArgs {
  std::string manifest;
};

void cmd_run_all(const Globals& g, const RunAllArgs& a) {
  pipeline::RunOptions options{g.out_dir, pipeline::cache_dir_from_env()};
  report::RunManifest manifest;
  if (!a.manifest.empty()) {
    if (g.seed) throw Error("--seed cannot override a manifest replay");
    std::ifstream in(a.manifest);
    if (!in) throw Error("cannot open " + a.manifest);
    std::stringstream text;
    text << in.rdbuf();
    manifest = pipeline::replay(report::read_manifest(text.str()), options);
  } else {
    auto cfg = g.config();
    if (!cfg) throw Error("run-all needs --config or --manifest");
    manifest = pipeline::run_all(*cfg, options);
  }
  std::cout << "run complete; config " << manifest.config_hash.substr(0, 12) << ", manifest "
            << (fs::path(g.out_dir) / "manifest.json").string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gender-bias analysis of masked language model probe outputs"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "Key/value config file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Seed for training and variational fusion");
  app.add_option("--out-dir", g.out_dir, "Output directory")->capture_default_str();
  app.add_option("--log-level", g.log_level, "trace, debug, info, warn, error")->capture_default_str();

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Validate politician records and probe tables");
  c_ingest->add_option("--politicians", ingest.politicians, "Politician JSON Lines");
  c_ingest->add_option("--probes", ingest.probes, "Probe JSON Lines");

  FilterArgs filter;
  auto* c_filter = app.add_subcommand("filter", "Keep adjective or verb lemmas of probe tables");
  c_filter->add_option("--probes", filter.probes, "Probe JSON Lines");
  c_filter->add_option("--treebank", filter.treebanks, "CoNLL-U file (repeatable)");
  c_filter->add_option("--language", filter.language, "Language code")->required();
  c_filter->add_option("--pos", filter.pos, "ADJ or VERB")->capture_default_str();
  c_filter->add_option("--top-k", filter.top_k, "List length (default depends on language)");
  c_filter->add_option("--slot-mode", filter.slot_mode, "merge, prefix or suffix")->capture_default_str();
  c_filter->add_option("--output", filter.output, "Output file");

  FuseArgs fuse;
  auto* c_fuse = app.add_subcommand("fuse-lex", "Fuse sentiment lexica into Dirichlet concentrations");
  c_fuse->add_option("--lexicon", fuse.lexica, "PATH:SCALE with SCALE binary|ternary|continuous|triple");
  c_fuse->add_option("--treebank", fuse.treebanks, "CoNLL-U file used to lemmatize entries");
  c_fuse->add_option("--language", fuse.language, "Language code")->required();
  c_fuse->add_option("--strategy", fuse.strategy, "pooled or variational")->capture_default_str();
  c_fuse->add_option("--view-weight", fuse.view_weight)->capture_default_str();
  c_fuse->add_option("--epochs", fuse.epochs, "Variational epochs")->capture_default_str();
  c_fuse->add_option("--output", fuse.output, "Output file");

  PmiArgs pmi_args;
  auto* c_pmi = app.add_subcommand("pmi", "Gender/word PMI table");
  c_pmi->add_option("--filtered", pmi_args.filtered, "Filtered probe JSON")->required();
  c_pmi->add_option("--model", pmi_args.model, "Restrict to one model id");
  c_pmi->add_option("--weighting", pmi_args.weighting, "unit or prob")->capture_default_str();
  c_pmi->add_option("--smoothing-k", pmi_args.smoothing_k)->capture_default_str();
  c_pmi->add_option("--min-count", pmi_args.min_count)->capture_default_str();
  c_pmi->add_option("--output", pmi_args.output, "Output CSV");

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "Train the latent-variable model over a hyperparameter grid");
  c_train->add_option("--filtered", train.filtered, "Filtered probe JSON")->required();
  c_train->add_option("--lexicon", train.lexicon, "Fused lexicon JSON")->required();
  c_train->add_option("--model", train.model, "Model id inside the filtered file");
  c_train->add_option("--alpha-grid", train.alpha_grid, "L1 weights")->delimiter(',')->capture_default_str();
  c_train->add_option("--beta-grid", train.beta_grid, "KL weights")->delimiter(',')->capture_default_str();
  c_train->add_option("--max-steps", train.max_steps)->capture_default_str();
  c_train->add_option("--learning-rate", train.learning_rate)->capture_default_str();
  c_train->add_option("--threads", train.threads)->capture_default_str();
  c_train->add_option("--output", train.output, "Output grid JSON");

  RankArgs rank;
  auto* c_rank = app.add_subcommand("rank", "Deviation rankings for every gender and sentiment");
  c_rank->add_option("--grid", rank.grids, "Grid JSON from train (repeatable)")->required();
  c_rank->add_option("--k", rank.k, "Rows")->capture_default_str();
  c_rank->add_option("--averaging", rank.averaging, "tau or eta")->capture_default_str();
  c_rank->add_option("--output", rank.output, "Output CSV");

  StatsArgs st;
  auto* c_stats = app.add_subcommand("stats", "Sentiment frequencies and Welch tests between genders");
  c_stats->add_option("--grid", st.grids, "Grid JSON from train (repeatable)")->required();
  c_stats->add_option("--lexicon", st.lexicon, "Fused lexicon JSON")->required();
  c_stats->add_option("--language", st.language, "Language label")->required();
  c_stats->add_option("--pos", st.pos)->capture_default_str();
  c_stats->add_option("--model", st.model, "Model label")->required();
  c_stats->add_option("--top-k", st.top_k, "Ranked words per frequency")->capture_default_str();
  c_stats->add_option("--bonferroni-m", st.bonferroni_m)->capture_default_str();
  c_stats->add_option("--supersenses", st.supersenses, "TSV lemma->supersense");
  c_stats->add_option("--output", st.output, "Output CSV");

  AnovaArgs anova;
  auto* c_anova = app.add_subcommand("anova", "Main-effects ANOVA by OLS with treatment coding");
  c_anova->add_option("--observations", anova.observations, "CSV with a value column")->required();
  c_anova->add_option("--factor", anova.factors, "Factor column (repeatable, in order)")->required();
  c_anova->add_option("--reference", anova.references, "FACTOR=LEVEL reference level");
  c_anova->add_option("--output", anova.output, "Output CSV");

  ReportArgs rep;
  auto* c_report = app.add_subcommand("report", "Sentiment-frequency plots from stats CSVs");
  c_report->add_option("--stats", rep.stats_files, "Stats CSV (repeatable)")->required();

  RunAllArgs run_all;
  auto* c_run = app.add_subcommand("run-all", "Full pipeline from a config or a manifest");
  c_run->add_option("--manifest", run_all.manifest, "Replay a previous run's manifest.json");

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::from_str(g.log_level));

  try {
    if (*c_ingest) cmd_ingest(g, ingest);
    else if (*c_filter) cmd_filter(g, filter);
    else if (*c_fuse) cmd_fuse(g, fuse);
    else if (*c_pmi) cmd_pmi(g, pmi_args);
    else if (*c_train) cmd_train(g, train);
    else if (*c_rank) cmd_rank(g, rank);
    else if (*c_stats) cmd_stats(g, st);
    else if (*c_anova) cmd_anova(g, anova);
    else if (*c_report) cmd_report(g, rep);
    else if (*c_run) cmd_run_all(g, run_all);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
