#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "stanceprobe/config.hpp"
#include "stanceprobe/pipeline.hpp"
#include "stanceprobe/vocabfilter.hpp"

using namespace stanceprobe;
using config::KeyValueConfig;

TEST_CASE("parse sections, lists and comments") {
  const auto cfg = KeyValueConfig::parse_string(
      "# top\n"
      "seed = 7\n"
      "name = \"a # not a comment\"  # trailing\n"
      "\n"
      "[lvm]\n"
      "beta_grid = [1e-3, 1, 100]\n"
      "flag = true\n"
      "[corpus]\n"
      "languages = [\"en\", \"es\"]\n"
      "empty = []\n");
  CHECK(cfg.get_int("seed", 0) == 7);
  CHECK(cfg.get_string("name") == "a # not a comment");
  CHECK(cfg.get_double_list("lvm.beta_grid", {}) == std::vector<double>{1e-3, 1.0, 100.0});
  CHECK(cfg.get_bool("lvm.flag", false));
  CHECK(cfg.get_list("corpus.languages") == std::vector<std::string>{"en", "es"});
  CHECK(cfg.get_list("corpus.empty").empty());
  CHECK(cfg.get_double("missing", 2.5) == 2.5);
  CHECK(cfg.subkeys("lvm") == std::vector<std::string>{"beta_grid", "flag"});
  CHECK_THROWS_AS(cfg.get_string("absent"), Error);
  CHECK_THROWS_AS(cfg.get_double("name", 0), Error);
  CHECK_THROWS_AS(cfg.get_string("corpus.languages"), Error);
}

TEST_CASE("parse errors carry the line") {
  auto line_of = [](const std::string& text) {
    try {
      KeyValueConfig::parse_string(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return std::size_t{0};
  };
  CHECK(line_of("a = 1\nnot a pair\n") == 2);
  CHECK(line_of("a = 1\n\n[broken\n") == 3);
  CHECK(line_of("x = [1, 2\n") == 1);
  CHECK(line_of("x = \"open\n") == 1);
  CHECK(line_of("x =\n") == 1);
  CHECK(line_of("= 3\n") == 1);
}

TEST_CASE("canonical text ignores formatting") {
  const auto a = KeyValueConfig::parse_string("b = 2\na = \"x\"\n[s]\nl = [1,2]\n");
  const auto b = KeyValueConfig::parse_string("# comment\n  a=\"x\"   \ns.l = [ 1 , 2 ]\nb=2\n");
  CHECK(a.canonical_text() == b.canonical_text());
  CHECK(a.canonical_text() == "a = \"x\"\nb = 2\ns.l = [\"1\", \"2\"]\n");
  CHECK(KeyValueConfig::parse_string(a.canonical_text()).canonical_text() == a.canonical_text());
  const auto c = KeyValueConfig::parse_string("b = 3\na = \"x\"\n[s]\nl = [1,2]\n");
  CHECK(a.canonical_text() != c.canonical_text());
}

TEST_CASE("settings defaults follow the protocol") {
  const auto cfg = KeyValueConfig::parse_string("[inputs]\nprobes = \"/tmp/p.jsonl\"\n");
  const auto s = pipeline::Settings::from_config(cfg);
  CHECK(s.alpha_grid == std::vector<double>{0.0, 1e-5, 1e-4, 1e-3, 1e-2});
  CHECK(s.beta_grid == std::vector<double>{1e-5, 1e-4, 1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0});
  CHECK(s.alpha_grid.size() * s.beta_grid.size() == 40);
  CHECK(s.pmi_smoothing == 0.5);
  CHECK(s.pmi_min_count == 5.0);
  CHECK(s.rank_k == 10);
  CHECK(s.bonferroni_m == 3);
  CHECK(s.averaging == lvm::Averaging::TAU);
  CHECK(s.train.learning_rate == 0.05);
  CHECK(s.train.max_steps == 2000);
  CHECK(s.train.tol == 1e-7);
  CHECK(s.train.init_sigma == 0.01);
  CHECK(s.slot_mode == vocabfilter::SlotMode::MERGE);
  CHECK_FALSE(s.top_k.has_value());
  CHECK(vocabfilter::default_top_k("en", PosClass::ADJ) == 20);
  CHECK(vocabfilter::default_top_k("en", PosClass::VERB) == 20);
  CHECK(vocabfilter::default_top_k("es", PosClass::ADJ) == 100);
  CHECK(vocabfilter::default_top_k("ru", PosClass::VERB) == 20);
}

TEST_CASE("settings read overrides and resolve paths") {
  const auto dir = std::filesystem::temp_directory_path() / "stanceprobe_config_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "run.toml");
    out << "seed = 11\n[inputs]\nprobes = \"probes.jsonl\"\n"
           "[lexicon.en]\nfiles = [\"a.tsv\", \"b.tsv\"]\nscales = [\"binary\", \"continuous\"]\n"
           "[treebank]\nen = [\"en.conllu\"]\n"
           "[lvm]\nalpha_grid = [0]\nbeta_grid = [1, 10]\n"
           "[model.bert]\narchitecture = \"bert\"\nsize = \"base\"\n"
           "[anova.reference]\nlanguage = \"en\"\n";
  }
  const auto s = pipeline::Settings::from_config(KeyValueConfig::load(dir / "run.toml"));
  CHECK(s.seed == 11);
  CHECK(s.train.seed == 11);
  CHECK(s.probes == dir / "probes.jsonl");
  REQUIRE(s.lexicons.at("en").size() == 2);
  CHECK(s.lexicons.at("en")[1].path == dir / "b.tsv");
  CHECK(s.treebanks.at("en").front() == dir / "en.conllu");
  CHECK(s.beta_grid == std::vector<double>{1.0, 10.0});
  CHECK(s.model_factors.at("bert").at("size") == "base");
  CHECK(s.reference_levels.at("language") == "en");
  std::filesystem::remove_all(dir);

  CHECK_THROWS_AS(pipeline::Settings::from_config(KeyValueConfig::parse_string("seed = 1\n")), Error);
  CHECK_THROWS_AS(pipeline::Settings::from_config(KeyValueConfig::parse_string(
                      "[inputs]\nprobes = \"/p\"\n[filter]\nslot_mode = \"sideways\"\n")),
                  Error);
  CHECK_THROWS_AS(pipeline::Settings::from_config(KeyValueConfig::parse_string(
                      "[inputs]\nprobes = \"/p\"\n[lexicon.en]\nfiles = [\"a\"]\nscales = []\n")),
                  Error);
}
