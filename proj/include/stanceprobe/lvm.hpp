#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "stanceprobe/lexfusion.hpp"
#include "stanceprobe/types.hpp"
#include "stanceprobe/vocabfilter.hpp"

namespace stanceprobe::lvm {

/// The model covers the two binary genders only; OTHER entities are ignored.
inline constexpr std::size_t kGenders = 2;
inline constexpr std::size_t kSentiments = 3;

/// MALE -> 0, FEMALE -> 1, OTHER -> nullopt.
std::optional<std::size_t> gender_slot(GenderClass g);

using SentimentLogits = std::array<std::array<double, kSentiments>, kGenders>;

/// Parameters of the word / sentiment / gender model
///   p(w, s, g) = p(w | s, g) p(s | g) p(g),
///   p(w | s, g) ∝ exp(m_w + eta(w, s)[g]).
struct ModelParams {
  std::vector<std::string> vocab;  // sorted, unique
  std::vector<double> m;           // word bias, one per vocab entry
  std::vector<double> eta;         // deviation, laid out [w][s][g]
  SentimentLogits sent_logits{};   // p(s | g) = softmax(sent_logits[g])
  std::array<double, kGenders> gender_prior{0.5, 0.5};  // fixed, empirical

  std::size_t size() const { return vocab.size(); }
  double& eta_at(std::size_t w, SentimentClass s, std::size_t g) {
    return eta[(w * kSentiments + index(s)) * kGenders + g];
  }
  double eta_at(std::size_t w, SentimentClass s, std::size_t g) const {
    return eta[(w * kSentiments + index(s)) * kGenders + g];
  }
  std::optional<std::size_t> word_index(const std::string& lemma) const;
};

/// Gradient with the same layout as ModelParams.
struct ParamGradient {
  std::vector<double> m;
  std::vector<double> eta;
  SentimentLogits sent_logits{};
};

struct TrainConfig {
  double alpha = 0.0;  // L1 weight
  double beta = 1.0;   // KL weight
  double learning_rate = 0.05;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t max_steps = 2000;
  std::uint64_t seed = 0;
  double tol = 1e-7;
  double init_sigma = 0.01;
};

inline const std::vector<double> kDefaultAlphaGrid = {0.0, 1e-5, 1e-4, 1e-3, 1e-2};
inline const std::vector<double> kDefaultBetaGrid = {1e-5, 1e-4, 1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0};

/// Sorted lemmas of all MALE/FEMALE entities.
std::vector<std::string> build_vocab(const vocabfilter::FilteredProbeSet& data);

/// Empirical (male, female) entity frequencies. Throws if neither occurs.
std::array<double, kGenders> empirical_gender_prior(const vocabfilter::FilteredProbeSet& data);

/// m and eta i.i.d. N(0, sigma^2), sentiment logits zero.
ModelParams init_params(std::vector<std::string> vocab, std::array<double, kGenders> gender_prior,
                        std::uint64_t seed, double sigma = 0.01);

/// p(w | s, g) over the vocabulary.
std::vector<double> word_dist(const ModelParams& params, SentimentClass s, std::size_t g);
/// p(s | g).
std::array<double, kSentiments> sentiment_prior(const ModelParams& params, std::size_t g);
/// p(w, g) with the sentiment summed out.
double marginal_word_gender(const ModelParams& params, std::size_t w, std::size_t g);
/// p(s | w) under the joint model.
std::array<double, kSentiments> posterior_sentiment(const ModelParams& params, std::size_t w);

/// Sum over named entities of sum_w p̂(w | n) log p(w, g_n). Value to maximise;
/// OTHER-gender entities do not contribute. Throws on a lemma outside vocab.
double main_objective(const ModelParams& params, const vocabfilter::FilteredProbeSet& data);

/// Mass-weighted KL(q(s|w) || p(s|w)) over lexicon-covered vocabulary words.
double kl_term(const ModelParams& params, const vocabfilter::FilteredProbeSet& data,
               const lexfusion::FusedLexicon& lexicon);

/// Sum of |eta| over all entries.
double l1_term(const ModelParams& params);

/// -L_main + beta * KL + alpha * L1 (minimised).
double total_loss(const ModelParams& params, const vocabfilter::FilteredProbeSet& data,
                  const lexfusion::FusedLexicon& lexicon, double alpha, double beta);

/// Analytic gradient of total_loss; the L1 part uses sign(eta), 0 at 0.
ParamGradient gradients(const ModelParams& params, const vocabfilter::FilteredProbeSet& data,
                        const lexfusion::FusedLexicon& lexicon, double alpha, double beta);

struct TrainResult {
  ModelParams params;
  std::vector<double> loss_trace;  // loss before each update, then the final loss
  std::size_t steps = 0;
  bool converged = false;
  double alpha = 0.0;
  double beta = 0.0;

  double final_loss() const { return loss_trace.back(); }
};

/// Adam on total_loss until max_steps or |Δloss| < tol. The vocabulary is
/// built from the data. Throws Error naming the step on a NaN loss.
TrainResult train(const vocabfilter::FilteredProbeSet& data, const lexfusion::FusedLexicon& lexicon,
                  const TrainConfig& config);

/// One run per (alpha, beta), alpha-major. `threads` > 1 runs pairs
/// concurrently; results do not depend on scheduling.
std::vector<TrainResult> grid_train(const vocabfilter::FilteredProbeSet& data,
                                    const lexfusion::FusedLexicon& lexicon,
                                    const std::vector<double>& alpha_grid,
                                    const std::vector<double>& beta_grid,
                                    const TrainConfig& base_config, unsigned threads = 1);

struct RankedLemma {
  std::string lemma;
  double tau = 0.0;

  friend bool operator==(const RankedLemma&, const RankedLemma&) = default;
};

struct DeviationRanking {
  GenderClass gender = GenderClass::MALE;
  SentimentClass sentiment = SentimentClass::POS;
  std::vector<RankedLemma> items;  // tau descending, ties by lemma
};

/// How deviations from several models are combined.
enum class Averaging { TAU, ETA };

/// tau_w = exp(eta(w, sentiment)[gender]) averaged over models (TAU) or
/// exp of the averaged eta (ETA); top `k` by tau, ties lexicographic.
DeviationRanking deviation_ranking(const std::vector<const ModelParams*>& models,
                                   GenderClass gender, SentimentClass sentiment, std::size_t k,
                                   Averaging averaging = Averaging::TAU);
DeviationRanking deviation_ranking(const std::vector<ModelParams>& models, GenderClass gender,
                                   SentimentClass sentiment, std::size_t k,
                                   Averaging averaging = Averaging::TAU);

void write_model(const ModelParams& params, const TrainConfig& config, std::ostream& out);
ModelParams read_model(std::istream& in);

/// All runs of a grid (hyperparameters, loss trace, parameters) as one JSON
/// document.
void write_grid(const std::vector<TrainResult>& results, const TrainConfig& base_config,
                std::ostream& out);
std::vector<TrainResult> read_grid(std::istream& in);

}  // namespace stanceprobe::lvm
