#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "stanceprobe/corpus.hpp"
#include "stanceprobe/types.hpp"

namespace stanceprobe::vocabfilter {

struct LexiconEntry {
  std::set<PosClass> pos_tags;
  std::string lemma;
};

/// Surface form -> (POS classes, lemma), keyed by case-folded form.
class PosLexicon {
 public:
  PosLexicon() = default;
  PosLexicon(std::string language, std::map<std::string, LexiconEntry> entries)
      : language_(std::move(language)), entries_(std::move(entries)) {}

  const std::string& language() const { return language_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::map<std::string, LexiconEntry>& entries() const { return entries_; }

  /// Folds `form` with the lexicon language's rule before lookup.
  const LexiconEntry* lookup(const std::string& form) const;

 private:
  std::string language_;
  std::map<std::string, LexiconEntry> entries_;
};

/// Accumulates (form, lemma, UPOS) triples from one or more treebanks.
class PosLexiconBuilder {
 public:
  explicit PosLexiconBuilder(std::string language) : language_(std::move(language)) {}

  void add(const std::string& form, const std::string& lemma, const std::string& upos);

  /// Reads the FORM, LEMMA and UPOS columns of a CoNLL-U stream. Comment
  /// lines, multiword-token ranges and empty nodes are skipped. Returns the
  /// number of token rows consumed.
  std::size_t add_conllu(std::istream& in);

  /// One entry per folded form; POS tags are the union over occurrences and
  /// the lemma is the most frequent one (lexicographically smallest on ties).
  PosLexicon build() const;

 private:
  struct Tally {
    std::set<PosClass> tags;
    std::map<std::string, std::size_t> lemma_counts;
  };
  std::string language_;
  std::map<std::string, Tally> tallies_;
};

PosClass map_upos(const std::string& upos);

/// Convenience wrapper: one lexicon from several CoNLL-U streams (unioned).
PosLexicon build_pos_lexicon(const std::vector<std::istream*>& treebanks,
                             const std::string& language);

struct LemmaProb {
  std::string lemma;
  double prob = 0.0;

  friend bool operator==(const LemmaProb&, const LemmaProb&) = default;
};

struct FilteredEntity {
  std::string entity_id;
  std::string model_id;
  GenderClass gender = GenderClass::OTHER;
  std::vector<LemmaProb> lemmas;  // prob descending, ties by lemma; sums to 1
};

struct FilterReport {
  std::size_t tables_seen = 0;
  std::size_t entities_dropped = 0;   // no token of the requested class
  std::size_t tokens_unknown = 0;     // absent from every treebank
  std::size_t tokens_wrong_pos = 0;
};

struct FilteredProbeSet {
  std::string language;
  PosClass pos_class = PosClass::ADJ;
  std::size_t top_k = 0;
  std::vector<FilteredEntity> entities;  // sorted by (model_id, entity_id)
  FilterReport report;

  std::vector<std::string> models() const;
  /// Subset restricted to one model, same language/pos/top_k.
  FilteredProbeSet for_model(const std::string& model_id) const;
};

/// How PREFIX and SUFFIX tables of the same entity are combined.
enum class SlotMode { MERGE, PREFIX_ONLY, SUFFIX_ONLY };

/// Default list lengths: English keeps 20 words for both classes; other
/// languages keep 100 adjectives and 20 verbs.
std::size_t default_top_k(const std::string& language, PosClass pos_class);

/// Keeps tokens of `pos_class`, maps them to lemmas (summing probability of
/// forms sharing a lemma), truncates to `top_k` and renormalizes. Only tables
/// in the lexicon's language take part. Under MERGE the lemma mass of both
/// slots is summed before truncation.
FilteredProbeSet filter_probe(const corpus::ProbeSet& probe, const PosLexicon& lex,
                              PosClass pos_class, std::size_t top_k,
                              SlotMode slot_mode = SlotMode::MERGE);

/// Re-expresses a filtered set as probe tables (one PREFIX table per entity,
/// lemmas as tokens). Used to check idempotence and for export.
corpus::ProbeSet to_probe_set(const FilteredProbeSet& data);

void write_filtered(const FilteredProbeSet& data, std::ostream& out);
FilteredProbeSet read_filtered(std::istream& in);

}  // namespace stanceprobe::vocabfilter
