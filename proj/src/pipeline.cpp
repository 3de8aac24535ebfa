#include "stanceprobe/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "stanceprobe/text.hpp"

namespace stanceprobe::pipeline {

namespace fs = std::filesystem;

std::string pos_slug(PosClass pos) {
  return pos == PosClass::VERB ? "verb" : (pos == PosClass::ADJ ? "adj" : "other");
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_path_key(const std::string& key) {
  const auto starts = [&](std::string_view p) { return key.rfind(p, 0) == 0; };
  const auto ends = [&](std::string_view s) {
    return key.size() >= s.size() && key.compare(key.size() - s.size(), s.size(), s) == 0;
  };
  return starts("inputs.") || starts("treebank.") || starts("supersense.") ||
         (starts("lexicon.") && ends(".files"));
}

fs::path resolve(const fs::path& base, const std::string& item) {
  fs::path p(item);
  if (p.is_relative()) p = base / p;
  return fs::absolute(p).lexically_normal();
}

template <typename T, typename Parse>
T parse_enum(const std::string& key, const std::string& text, Parse parse) {
  auto v = parse(text);
  if (!v) throw Error("config key '" + key + "' has an unknown value: " + text);
  return *v;
}

std::optional<vocabfilter::SlotMode> parse_slot_mode(std::string_view s) {
  if (s == "merge") return vocabfilter::SlotMode::MERGE;
  if (s == "prefix") return vocabfilter::SlotMode::PREFIX_ONLY;
  if (s == "suffix") return vocabfilter::SlotMode::SUFFIX_ONLY;
  return std::nullopt;
}

std::optional<lexfusion::FusionStrategy> parse_strategy(std::string_view s) {
  if (s == "pooled") return lexfusion::FusionStrategy::POOLED;
  if (s == "variational") return lexfusion::FusionStrategy::VARIATIONAL;
  return std::nullopt;
}

std::optional<pmi::Weighting> parse_weighting(std::string_view s) {
  if (s == "unit") return pmi::Weighting::UNIT;
  if (s == "prob") return pmi::Weighting::PROB;
  return std::nullopt;
}

std::optional<lvm::Averaging> parse_averaging(std::string_view s) {
  if (s == "tau") return lvm::Averaging::TAU;
  if (s == "eta") return lvm::Averaging::ETA;
  return std::nullopt;
}

std::size_t get_size(const config::KeyValueConfig& cfg, const std::string& key, std::size_t fallback) {
  const auto v = cfg.get_int(key, static_cast<long long>(fallback));
  if (v < 0) throw Error("config key '" + key + "' must be non-negative");
  return static_cast<std::size_t>(v);
}

template <typename Writer>
void emit(const fs::path& path, Writer&& writer) {
  std::ostringstream out;
  writer(out);
  report::write_atomically(path, out.str());
}

}  // namespace

Settings Settings::from_config(const config::KeyValueConfig& raw) {
  const auto cfg = resolve_paths(raw);
  Settings s;
  s.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 0));
  if (cfg.has("inputs.politicians")) s.politicians = cfg.get_string("inputs.politicians");
  s.probes = cfg.get_string("inputs.probes");
  s.languages = cfg.get_list("corpus.languages");
  if (cfg.has("filter.pos_classes")) {
    s.pos_classes.clear();
    for (const auto& p : cfg.get_list("filter.pos_classes"))
      s.pos_classes.push_back(parse_enum<PosClass>("filter.pos_classes", p, parse_pos_class));
  }
  s.slot_mode = parse_enum<vocabfilter::SlotMode>(
      "filter.slot_mode", cfg.get_string("filter.slot_mode", "merge"), parse_slot_mode);
  if (cfg.has("filter.top_k")) s.top_k = get_size(cfg, "filter.top_k", 0);
  if (s.top_k && *s.top_k == 0) throw Error("filter.top_k must be at least 1");

  for (const auto& lang : cfg.subkeys("treebank"))
    for (const auto& p : cfg.get_list("treebank." + lang)) s.treebanks[lang].emplace_back(p);
  for (const auto& lang : cfg.subkeys("lexicon")) {
    const auto files = cfg.get_list("lexicon." + lang + ".files");
    const auto scales = cfg.get_list("lexicon." + lang + ".scales");
    if (files.size() != scales.size())
      throw Error("lexicon." + lang + ": files and scales differ in length");
    for (std::size_t i = 0; i < files.size(); ++i)
      s.lexicons[lang].push_back(
          {files[i], parse_enum<lexfusion::Scale>("lexicon." + lang + ".scales", scales[i],
                                                  lexfusion::parse_scale)});
  }
  for (const auto& lang : cfg.subkeys("supersense"))
    s.supersenses[lang] = cfg.get_string("supersense." + lang);

  s.fusion_strategy = parse_enum<lexfusion::FusionStrategy>(
      "fusion.strategy", cfg.get_string("fusion.strategy", "pooled"), parse_strategy);
  s.fusion.view_weight = cfg.get_double("fusion.view_weight", s.fusion.view_weight);
  s.fusion.epochs = get_size(cfg, "fusion.epochs", s.fusion.epochs);
  s.fusion.batch_size = get_size(cfg, "fusion.batch_size", s.fusion.batch_size);
  s.fusion.learning_rate = cfg.get_double("fusion.learning_rate", s.fusion.learning_rate);
  s.fusion.seed = s.seed;

  s.pmi_weighting = parse_enum<pmi::Weighting>("pmi.weighting", cfg.get_string("pmi.weighting", "unit"),
                                               parse_weighting);
  s.pmi_smoothing = cfg.get_double("pmi.smoothing_k", s.pmi_smoothing);
  s.pmi_min_count = cfg.get_double("pmi.min_count", s.pmi_min_count);

  s.alpha_grid = cfg.get_double_list("lvm.alpha_grid", s.alpha_grid);
  s.beta_grid = cfg.get_double_list("lvm.beta_grid", s.beta_grid);
  s.train.learning_rate = cfg.get_double("lvm.learning_rate", s.train.learning_rate);
  s.train.adam_beta1 = cfg.get_double("lvm.adam_beta1", s.train.adam_beta1);
  s.train.adam_beta2 = cfg.get_double("lvm.adam_beta2", s.train.adam_beta2);
  s.train.adam_eps = cfg.get_double("lvm.adam_eps", s.train.adam_eps);
  s.train.max_steps = get_size(cfg, "lvm.max_steps", s.train.max_steps);
  s.train.tol = cfg.get_double("lvm.tol", s.train.tol);
  s.train.init_sigma = cfg.get_double("lvm.init_sigma", s.train.init_sigma);
  s.train.seed = s.seed;
  s.averaging = parse_enum<lvm::Averaging>("lvm.averaging", cfg.get_string("lvm.averaging", "tau"),
                                           parse_averaging);
  s.threads = static_cast<unsigned>(std::max<std::size_t>(1, get_size(cfg, "lvm.threads", 1)));

  s.rank_k = get_size(cfg, "report.rank_k", s.rank_k);
  s.sentiment_top_k = get_size(cfg, "report.sentiment_top_k", s.sentiment_top_k);
  s.bonferroni_m = get_size(cfg, "report.bonferroni_m", s.bonferroni_m);

  for (const auto& model : cfg.subkeys("model"))
    for (const auto& factor : cfg.subkeys("model." + model))
      s.model_factors[model][factor] = cfg.get_string("model." + model + "." + factor);
  s.anova_factors = cfg.get_list("anova.factors", s.anova_factors);
  for (const auto& factor : cfg.subkeys("anova.reference"))
    s.reference_levels[factor] = cfg.get_string("anova.reference." + factor);
  return s;
}

config::KeyValueConfig resolve_paths(const config::KeyValueConfig& cfg) {
  config::KeyValueConfig out = cfg;
  for (const auto& [key, value] : cfg.values()) {
    if (!is_path_key(key)) continue;
    auto v = value;
    for (auto& item : v.items) item = resolve(cfg.base_dir, item).string();
    if (!v.is_list) v.quoted = true;
    out.set(key, std::move(v));
  }
  out.base_dir.clear();
  return out;
}

std::vector<fs::path> input_files(const Settings& s) {
  std::set<fs::path> files;
  if (!s.politicians.empty()) files.insert(s.politicians);
  files.insert(s.probes);
  for (const auto& [lang, paths] : s.treebanks) files.insert(paths.begin(), paths.end());
  for (const auto& [lang, views] : s.lexicons)
    for (const auto& v : views) files.insert(v.path);
  for (const auto& [lang, path] : s.supersenses) files.insert(path);
  return {files.begin(), files.end()};
}

corpus::ProbeSet restrict_to_records(const corpus::ProbeSet& probe,
                                     const std::vector<corpus::PoliticianRecord>& records) {
  std::map<std::string, const corpus::PoliticianRecord*> by_id;
  for (const auto& r : records) by_id[r.entity_id] = &r;
  std::vector<corpus::ProbeTable> kept;
  std::size_t dropped = 0;
  for (const auto& t : probe.tables()) {
    auto it = by_id.find(t.entity_id);
    if (it == by_id.end() || !it->second->has_name(t.language)) {
      ++dropped;
      continue;
    }
    auto copy = t;
    if (copy.gender != it->second->gender)
      spdlog::warn("probe table {} disagrees with its record on gender; using the record",
                   corpus::key_of(t).describe());
    copy.gender = it->second->gender;
    kept.push_back(std::move(copy));
  }
  if (dropped > 0) spdlog::info("{} probe tables without a retained, named record dropped", dropped);
  return corpus::ProbeSet::from_tables(std::move(kept));
}

std::vector<double> grid_frequencies(const std::vector<lvm::TrainResult>& grid,
                                     const lexfusion::FusedLexicon& lexicon, GenderClass gender,
                                     SentimentClass sentiment, std::size_t top_k) {
  std::vector<double> out;
  for (const auto& run : grid) {
    const auto ranking = lvm::deviation_ranking({&run.params}, gender, sentiment, top_k);
    if (auto f = stats::sentiment_frequency(ranking, lexicon, sentiment)) out.push_back(*f);
  }
  return out;
}

std::vector<SentimentStat> sentiment_stats(const std::vector<lvm::TrainResult>& grid,
                                           const lexfusion::FusedLexicon& lexicon,
                                           const std::string& language, PosClass pos,
                                           const std::string& model, std::size_t top_k,
                                           std::size_t bonferroni_m) {
  const auto mean = [](const std::vector<double>& v) {
    if (v.empty()) return kNaN;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  std::vector<SentimentStat> rows;
  for (auto s : kAllSentiments) {
    SentimentStat row;
    row.language = language;
    row.pos = pos;
    row.model = model;
    row.sentiment = s;
    const auto masc = grid_frequencies(grid, lexicon, GenderClass::MALE, s, top_k);
    const auto fem = grid_frequencies(grid, lexicon, GenderClass::FEMALE, s, top_k);
    row.n_masc = masc.size();
    row.n_fem = fem.size();
    row.mean_masc = mean(masc);
    row.mean_fem = mean(fem);
    if (masc.size() >= 2 && fem.size() >= 2) {
      row.test = stats::welch_test(masc, fem);
      row.significant = stats::bonferroni({row.test.p}, bonferroni_m).front();
    } else {
      row.test = {kNaN, kNaN, kNaN};
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_stats_csv(const std::vector<SentimentStat>& rows, std::ostream& out) {
  out << "language,pos,model,sentiment,n_masc,n_fem,mean_masc,mean_fem,t,df,p,significant\n";
  for (const auto& r : rows)
    out << text::csv_escape(r.language) << ',' << to_string(r.pos) << ',' << text::csv_escape(r.model)
        << ',' << to_string(r.sentiment) << ',' << r.n_masc << ',' << r.n_fem << ','
        << format_double(r.mean_masc) << ',' << format_double(r.mean_fem) << ','
        << format_double(r.test.t) << ',' << format_double(r.test.df) << ','
        << format_double(r.test.p) << ',' << (r.significant ? "true" : "false") << '\n';
}

std::vector<SentimentStat> read_stats_csv(std::istream& in) {
  const auto number = [](const std::string& s, std::size_t line) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) throw ParseError("bad number '" + s + "'", line);
    return v;
  };
  std::vector<SentimentStat> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 || text::trim(line).empty()) continue;
    // Model and language names are plain identifiers; quoted fields are not expected here.
    const auto cols = text::split(line, ',');
    if (cols.size() != 12) throw ParseError("expected 12 columns", line_no);
    SentimentStat r;
    r.language = cols[0];
    auto pos = parse_pos_class(cols[1]);
    auto sent = parse_sentiment(cols[3]);
    if (!pos || !sent) throw ParseError("bad POS class or sentiment", line_no);
    r.pos = *pos;
    r.model = cols[2];
    r.sentiment = *sent;
    r.n_masc = static_cast<std::size_t>(number(cols[4], line_no));
    r.n_fem = static_cast<std::size_t>(number(cols[5], line_no));
    r.mean_masc = number(cols[6], line_no);
    r.mean_fem = number(cols[7], line_no);
    r.test.t = number(cols[8], line_no);
    r.test.df = number(cols[9], line_no);
    r.test.p = number(cols[10], line_no);
    r.significant = cols[11] == "true";
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<report::SentimentPoint> plot_points(const std::vector<SentimentStat>& rows, PosClass pos,
                                                SentimentClass sentiment) {
  std::vector<report::SentimentPoint> points;
  for (const auto& r : rows) {
    if (r.pos != pos || r.sentiment != sentiment) continue;
    if (!std::isnan(r.mean_masc))
      points.push_back({r.language, r.model, GenderClass::MALE, r.mean_masc, r.significant});
    if (!std::isnan(r.mean_fem))
      points.push_back({r.language, r.model, GenderClass::FEMALE, r.mean_fem, r.significant});
  }
  return points;
}

std::optional<fs::path> cache_dir_from_env() {
  const char* v = std::getenv("STANCEPROBE_CACHE");
  if (v == nullptr || *v == '\0') return std::nullopt;
  return fs::path(v);
}

std::vector<lvm::TrainResult> cached_grid_train(const vocabfilter::FilteredProbeSet& data,
                                                const lexfusion::FusedLexicon& lexicon,
                                                const std::vector<double>& alpha_grid,
                                                const std::vector<double>& beta_grid,
                                                const lvm::TrainConfig& config, unsigned threads,
                                                const std::optional<fs::path>& cache_dir) {
  if (!cache_dir) return lvm::grid_train(data, lexicon, alpha_grid, beta_grid, config, threads);

  std::ostringstream key;
  key << "grid-v1\n" << report::kSoftwareVersion << '\n';
  vocabfilter::write_filtered(data, key);
  lexfusion::write_fused(lexicon, key);
  for (double a : alpha_grid) key << format_double(a) << ' ';
  key << '\n';
  for (double b : beta_grid) key << format_double(b) << ' ';
  key << '\n'
      << format_double(config.learning_rate) << ' ' << format_double(config.adam_beta1) << ' '
      << format_double(config.adam_beta2) << ' ' << format_double(config.adam_eps) << ' '
      << config.max_steps << ' ' << config.seed << ' ' << format_double(config.tol) << ' '
      << format_double(config.init_sigma) << '\n';
  const auto path = *cache_dir / ("grid-" + report::sha256_hex(key.str()) + ".json");

  if (fs::exists(path)) {
    std::ifstream in(path);
    try {
      auto grid = lvm::read_grid(in);
      spdlog::debug("grid cache hit {}", path.string());
      return grid;
    } catch (const Error& e) {
      spdlog::warn("ignoring unreadable cache entry {}: {}", path.string(), e.what());
    }
  }
  auto grid = lvm::grid_train(data, lexicon, alpha_grid, beta_grid, config, threads);
  emit(path, [&](std::ostream& out) { lvm::write_grid(grid, config, out); });
  return grid;
}

vocabfilter::PosLexicon load_pos_lexicon(const Settings& settings, const std::string& language) {
  auto it = settings.treebanks.find(language);
  if (it == settings.treebanks.end() || it->second.empty())
    throw Error("no treebank configured for language '" + language + "'");
  vocabfilter::PosLexiconBuilder builder(language);
  for (const auto& path : it->second) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open treebank " + path.string());
    builder.add_conllu(in);
  }
  auto lex = builder.build();
  if (lex.empty()) spdlog::warn("treebanks for '{}' produced an empty lexicon", language);
  return lex;
}

lexfusion::FusedLexicon load_fused_lexicon(const Settings& settings, const std::string& language,
                                           const vocabfilter::PosLexicon& pos_lexicon) {
  auto it = settings.lexicons.find(language);
  if (it == settings.lexicons.end() || it->second.empty())
    throw Error("no sentiment lexicon configured for language '" + language + "'");
  std::vector<lexfusion::RawLexicon> views;
  for (const auto& src : it->second)
    views.push_back(lexfusion::ingest_lexicon(src.path, src.scale, language, &pos_lexicon));
  return lexfusion::fuse(views, settings.fusion_strategy, settings.fusion);
}

namespace {

struct ModelOutcome {
  std::string model;
  std::vector<SentimentStat> stats;
};

void run_group(const Settings& s, const RunOptions& options, const std::string& language,
               PosClass pos, const corpus::ProbeSet& probe, const vocabfilter::PosLexicon& pos_lex,
               const lexfusion::FusedLexicon& lexicon,
               const std::map<std::string, std::string>* supersenses,
               std::vector<SentimentStat>& all_stats) {
  const auto top_k = s.top_k.value_or(vocabfilter::default_top_k(language, pos));
  const auto filtered = vocabfilter::filter_probe(probe, pos_lex, pos, top_k, s.slot_mode);
  const auto group = language + "_" + pos_slug(pos);
  spdlog::info("{}: {} entities kept, {} dropped, {} unknown tokens", group,
               filtered.entities.size(), filtered.report.entities_dropped,
               filtered.report.tokens_unknown);
  emit(options.out_dir / "filtered" / (group + ".json"),
       [&](std::ostream& out) { vocabfilter::write_filtered(filtered, out); });

  std::vector<SentimentStat> group_stats;
  std::ostringstream supersense_csv;
  supersense_csv << "language,pos,model,gender,sentiment,supersense,frequency\n";
  for (const auto& model : filtered.models()) {
    const auto data = filtered.for_model(model);
    const auto counts = pmi::cooccurrence_counts(data, s.pmi_weighting);
    const auto scores = pmi::compute_pmi(counts, s.pmi_smoothing);
    emit(options.out_dir / "pmi" / (group + "_" + model + ".csv"),
         [&](std::ostream& out) { pmi::write_pmi_csv(counts, scores, s.pmi_min_count, out); });

    bool has_male = false, has_female = false;
    for (const auto& e : data.entities) {
      has_male |= e.gender == GenderClass::MALE;
      has_female |= e.gender == GenderClass::FEMALE;
    }
    if (!has_male || !has_female) {
      spdlog::warn("{} / {}: needs both masculine and feminine entities; model skipped", group, model);
      continue;
    }
    const auto grid = cached_grid_train(data, lexicon, s.alpha_grid, s.beta_grid, s.train, s.threads,
                                        options.cache_dir);
    std::vector<const lvm::ModelParams*> params;
    for (const auto& r : grid) params.push_back(&r.params);

    std::vector<lvm::DeviationRanking> rankings;
    for (auto g : {GenderClass::MALE, GenderClass::FEMALE})
      for (auto sent : kAllSentiments)
        rankings.push_back(lvm::deviation_ranking(params, g, sent, s.rank_k, s.averaging));
    report::write_atomically(options.out_dir / "rank" / (group + "_" + model + ".csv"),
                             report::emit_rank_table(rankings, s.rank_k));

    auto rows = sentiment_stats(grid, lexicon, language, pos, model, s.sentiment_top_k, s.bonferroni_m);
    group_stats.insert(group_stats.end(), rows.begin(), rows.end());

    if (supersenses) {
      for (auto g : {GenderClass::MALE, GenderClass::FEMALE})
        for (auto sent : kAllSentiments) {
          const auto ranking = lvm::deviation_ranking(params, g, sent, s.sentiment_top_k, s.averaging);
          for (const auto& [cls, freq] : stats::supersense_frequency(ranking, *supersenses))
            supersense_csv << text::csv_escape(language) << ',' << to_string(pos) << ','
                           << text::csv_escape(model) << ',' << table_label(g) << ','
                           << to_string(sent) << ',' << text::csv_escape(cls) << ','
                           << format_double(freq) << '\n';
        }
    }
  }
  emit(options.out_dir / ("stats_" + group + ".csv"),
       [&](std::ostream& out) { write_stats_csv(group_stats, out); });
  if (supersenses)
    report::write_atomically(options.out_dir / ("supersense_" + group + ".csv"), supersense_csv.str());
  all_stats.insert(all_stats.end(), group_stats.begin(), group_stats.end());
}

void run_anova(const Settings& s, const RunOptions& options, PosClass pos,
               const std::vector<SentimentStat>& all_stats) {
  std::vector<std::pair<std::string, stats::AnovaResult>> columns;
  std::vector<std::string> used_factors;
  for (auto g : {GenderClass::MALE, GenderClass::FEMALE}) {
    for (auto sent : kAllSentiments) {
      const auto label = std::string(table_label(g)) + "-" + std::string(to_string(sent));
      std::vector<stats::Observation> obs;
      for (const auto& r : all_stats) {
        if (r.pos != pos || r.sentiment != sent) continue;
        const double v = g == GenderClass::MALE ? r.mean_masc : r.mean_fem;
        if (std::isnan(v)) continue;
        stats::Observation o;
        o.value = v;
        o.gender = g;
        o.sentiment = sent;
        if (auto it = s.model_factors.find(r.model); it != s.model_factors.end()) o.factors = it->second;
        o.factors["language"] = r.language;
        obs.push_back(std::move(o));
      }
      std::vector<std::string> factors;
      for (const auto& f : s.anova_factors) {
        std::set<std::string> levels;
        bool complete = true;
        for (const auto& o : obs) {
          auto it = o.factors.find(f);
          if (it == o.factors.end()) {
            complete = false;
            break;
          }
          levels.insert(it->second);
        }
        if (complete && levels.size() >= 2) factors.push_back(f);
      }
      if (factors.empty()) {
        spdlog::warn("ANOVA {} {}: no factor with two or more levels; skipped", pos_slug(pos), label);
        continue;
      }
      try {
        auto result = stats::anova_ols(obs, factors, s.reference_levels);
        emit(options.out_dir / "anova" / (pos_slug(pos) + "_" + label + ".csv"),
             [&](std::ostream& out) { stats::write_anova_csv(result, out); });
        for (const auto& f : factors)
          if (std::find(used_factors.begin(), used_factors.end(), f) == used_factors.end())
            used_factors.push_back(f);
        columns.emplace_back(label, std::move(result));
      } catch (const Error& e) {
        spdlog::warn("ANOVA {} {}: {}", pos_slug(pos), label, e.what());
      }
    }
  }
  if (columns.empty()) return;
  std::vector<std::string> ordered;
  for (const auto& f : s.anova_factors)
    if (std::find(used_factors.begin(), used_factors.end(), f) != used_factors.end())
      ordered.push_back(f);
  emit(options.out_dir / ("anova_" + pos_slug(pos) + ".csv"),
       [&](std::ostream& out) { stats::write_anova_table(columns, ordered, out); });
}

}  // namespace

report::RunManifest run_all(const config::KeyValueConfig& raw_cfg, const RunOptions& options) {
  report::RunManifest manifest;
  manifest.started_at = report::utc_timestamp();
  const auto cfg = resolve_paths(raw_cfg);
  const auto s = Settings::from_config(cfg);
  manifest.config_text = cfg.canonical_text();
  manifest.config_hash = report::sha256_hex(manifest.config_text);
  manifest.seed = s.seed;
  manifest.alpha_grid = s.alpha_grid;
  manifest.beta_grid = s.beta_grid;
  for (const auto& path : input_files(s)) manifest.input_digests[path.string()] = report::file_sha256(path);

  fs::create_directories(options.out_dir);
  auto probe = corpus::read_probe_set(s.probes);
  if (!s.politicians.empty()) {
    std::ifstream in(s.politicians);
    if (!in) throw Error("cannot open " + s.politicians.string());
    const auto parsed = corpus::parse_politicians(in);
    probe = restrict_to_records(probe, parsed.records);
  }
  const auto languages = s.languages.empty() ? probe.languages() : s.languages;

  std::vector<SentimentStat> all_stats;
  for (const auto& language : languages) {
    const auto pos_lex = load_pos_lexicon(s, language);
    const auto lexicon = load_fused_lexicon(s, language, pos_lex);
    emit(options.out_dir / ("lexicon_" + language + ".json"),
         [&](std::ostream& out) { lexfusion::write_fused(lexicon, out); });
    std::optional<std::map<std::string, std::string>> supersenses;
    if (auto it = s.supersenses.find(language); it != s.supersenses.end()) {
      std::ifstream in(it->second);
      if (!in) throw Error("cannot open " + it->second.string());
      supersenses = stats::read_supersense_map(in);
    }
    for (auto pos : s.pos_classes)
      run_group(s, options, language, pos, probe, pos_lex, lexicon,
                supersenses ? &*supersenses : nullptr, all_stats);
  }

  for (auto pos : s.pos_classes) {
    for (auto sent : kAllSentiments) {
      const auto points = plot_points(all_stats, pos, sent);
      if (points.empty()) continue;
      const auto title = std::string(to_string(pos)) + " " + std::string(to_string(sent)) +
                         " frequency of top-deviation words";
      report::emit_sentiment_plot(
          points, options.out_dir / ("plot_" + pos_slug(pos) + "_" + std::string(to_string(sent)) + ".svg"),
          title);
    }
    run_anova(s, options, pos, all_stats);
  }

  manifest.finished_at = report::utc_timestamp();
  report::write_atomically(options.out_dir / "manifest.json", report::write_manifest(manifest));
  return manifest;
}

report::RunManifest replay(const report::RunManifest& manifest, const RunOptions& options) {
  if (report::sha256_hex(manifest.config_text) != manifest.config_hash)
    throw Error("manifest config does not match its hash");
  for (const auto& [path, digest] : manifest.input_digests) {
    if (!fs::exists(path)) throw Error("manifest input missing: " + path);
    if (report::file_sha256(path) != digest) throw Error("manifest input changed: " + path);
  }
  const auto cfg = config::KeyValueConfig::parse_string(manifest.config_text);
  if (static_cast<std::uint64_t>(cfg.get_int("seed", 0)) != manifest.seed)
    throw Error("manifest seed does not match its config");
  return run_all(cfg, options);
}

}  // namespace stanceprobe::pipeline
