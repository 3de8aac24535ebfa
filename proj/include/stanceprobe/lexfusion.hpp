#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "stanceprobe/types.hpp"

namespace stanceprobe::vocabfilter {
class PosLexicon;
}

namespace stanceprobe::lexfusion {

/// (POS, NEG, NEU), indexed with index(SentimentClass).
using Triple = std::array<double, 3>;

enum class Scale { BINARY, TERNARY, CONTINUOUS, PROBABILITY_TRIPLE };

std::string_view to_string(Scale scale);
std::optional<Scale> parse_scale(std::string_view text);

struct RawLexicon {
  std::string name;
  Scale scale = Scale::BINARY;
  /// One score for the scalar scales, (pos, neg, neu) for PROBABILITY_TRIPLE.
  std::map<std::string, std::vector<double>> entries;
  /// Rows that folded onto an already-present word; the first row wins.
  std::size_t duplicates = 0;
};

/// Reads a TSV lexicon: `word<TAB>score` or `word<TAB>pos<TAB>neg<TAB>neu`.
/// Blank lines and `#` comments are ignored. Words are case-folded for
/// `language`; when `lemmatizer` is given, forms it knows are replaced by
/// their lemma. Out-of-scale scores raise ParseError naming word and value.
RawLexicon ingest_lexicon(std::istream& in, std::string name, Scale scale,
                          const std::string& language,
                          const vocabfilter::PosLexicon* lemmatizer = nullptr);
RawLexicon ingest_lexicon(const std::filesystem::path& path, Scale scale,
                          const std::string& language,
                          const vocabfilter::PosLexicon* lemmatizer = nullptr);

/// Maps one raw score onto (POS, NEG, NEU) pseudo-counts.
Triple pseudo_counts(Scale scale, const std::vector<double>& score);

/// Word -> Dirichlet(3) concentration over (POS, NEG, NEU).
class FusedLexicon {
 public:
  FusedLexicon() = default;
  explicit FusedLexicon(std::map<std::string, Triple> concentrations);

  const Triple* concentration(const std::string& word) const;
  /// Dirichlet mean; components positive and summing to 1.
  std::optional<Triple> expectation(const std::string& word) const;
  /// Class with the largest expected probability (ties NEU > POS > NEG).
  std::optional<SentimentClass> argmax_class(const std::string& word) const;

  bool contains(const std::string& word) const { return entries_.contains(word); }
  std::size_t size() const { return entries_.size(); }
  const std::map<std::string, Triple>& entries() const { return entries_; }

 private:
  std::map<std::string, Triple> entries_;
};

Triple dirichlet_mean(const Triple& alpha);

/// argmax with ties broken NEU > POS > NEG.
SentimentClass argmax_with_ties(const Triple& scores);

enum class FusionStrategy { POOLED, VARIATIONAL };

struct FusionConfig {
  double view_weight = 1.0;
  Triple base_prior{1.0, 1.0, 1.0};
  // VARIATIONAL only.
  std::size_t epochs = 300;
  std::size_t batch_size = 256;
  double learning_rate = 0.05;
  std::uint64_t seed = 0;
};

/// Fuses views into one lexicon. POOLED adds weighted pseudo-counts to the
/// base prior. VARIATIONAL fits a per-word Dirichlet posterior and a per-view
/// 3x3 confusion decoder by stochastic gradient ascent on the evidence bound.
FusedLexicon fuse(const std::vector<RawLexicon>& views, FusionStrategy strategy,
                  const FusionConfig& config = {});

namespace detail {

/// Evidence bound pieces of the variational fusion, exposed for testing.
/// `log_conc` is one log-concentration triple per word, `view_logits` one
/// row-major 3x3 logit matrix per view, `obs` (word, view, pseudo-count)
/// observations.
struct VariationalProblem {
  std::size_t n_words = 0;
  std::size_t n_views = 0;
  Triple prior{1.0, 1.0, 1.0};
  struct Obs {
    std::size_t word;
    std::size_t view;
    Triple counts;
  };
  std::vector<Obs> obs;
};

struct VariationalState {
  std::vector<Triple> log_conc;
  std::vector<std::array<double, 9>> view_logits;
};

double evidence_bound(const VariationalProblem& problem, const VariationalState& state);
/// Gradient of the full-batch evidence bound.
VariationalState evidence_bound_gradient(const VariationalProblem& problem,
                                         const VariationalState& state);

}  // namespace detail

/// Mean Dirichlet expectation over tokens found in the lexicon, then argmax
/// (ties NEU > POS > NEG). No matched token gives NEU.
SentimentClass classify_text(const FusedLexicon& lex, const std::vector<std::string>& tokens);

struct LabeledText {
  std::vector<std::string> tokens;
  SentimentClass gold = SentimentClass::NEU;
};

struct Evaluation {
  double macro_f1 = 0.0;
  double accuracy = 0.0;
  Triple per_class_f1{};
  /// Classes absent from both gold labels and predictions (F1 counted as 0).
  std::vector<SentimentClass> absent_classes;
};

Evaluation evaluate_lexicon(const FusedLexicon& lex, const std::vector<LabeledText>& corpus);

/// JSON object word -> [alpha_pos, alpha_neg, alpha_neu].
void write_fused(const FusedLexicon& lex, std::ostream& out);
FusedLexicon read_fused(std::istream& in);

}  // namespace stanceprobe::lexfusion
