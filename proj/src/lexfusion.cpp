#include "stanceprobe/lexfusion.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <nlohmann/json.hpp>

#include "stanceprobe/adam.hpp"
#include "stanceprobe/text.hpp"
#include "stanceprobe/vocabfilter.hpp"

namespace stanceprobe::lexfusion {

std::string_view to_string(Scale scale) {
  switch (scale) {
    case Scale::BINARY: return "binary";
    case Scale::TERNARY: return "ternary";
    case Scale::CONTINUOUS: return "continuous";
    case Scale::PROBABILITY_TRIPLE: return "triple";
  }
  return "binary";
}

std::optional<Scale> parse_scale(std::string_view text) {
  std::string s(text);
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (s == "binary") return Scale::BINARY;
  if (s == "ternary") return Scale::TERNARY;
  if (s == "continuous") return Scale::CONTINUOUS;
  if (s == "triple" || s == "probability_triple" || s == "probability") return Scale::PROBABILITY_TRIPLE;
  return std::nullopt;
}

namespace {

std::optional<double> parse_number(const std::string& field) {
  const std::string s(text::trim(field));
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (errno != 0 || end != s.c_str() + s.size()) return std::nullopt;
  return v;
}

bool in_scale(Scale scale, const std::vector<double>& score) {
  switch (scale) {
    case Scale::BINARY: return score[0] == 1.0 || score[0] == -1.0;
    case Scale::TERNARY: return score[0] == 1.0 || score[0] == -1.0 || score[0] == 0.0;
    case Scale::CONTINUOUS: return std::isfinite(score[0]) && score[0] >= -1.0 && score[0] <= 1.0;
    case Scale::PROBABILITY_TRIPLE:
      return std::all_of(score.begin(), score.end(),
                         [](double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; });
  }
  return false;
}

}  // namespace

RawLexicon ingest_lexicon(std::istream& in, std::string name, Scale scale,
                          const std::string& language, const vocabfilter::PosLexicon* lemmatizer) {
  RawLexicon lex;
  lex.name = std::move(name);
  lex.scale = scale;
  const std::size_t n_scores = scale == Scale::PROBABILITY_TRIPLE ? 3 : 1;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty() || line.front() == '#') continue;
    const auto cols = text::split(line, '\t');
    if (cols.size() != n_scores + 1)
      throw ParseError("expected " + std::to_string(n_scores + 1) + " tab-separated columns", line_no);
    std::string word = text::fold_case(text::trim(cols[0]), language);
    if (lemmatizer)
      if (const auto* e = lemmatizer->lookup(word)) word = e->lemma;
    std::vector<double> score;
    for (std::size_t i = 1; i <= n_scores; ++i) {
      auto v = parse_number(cols[i]);
      if (!v) throw ParseError("non-numeric score '" + cols[i] + "' for word '" + word + "'", line_no);
      score.push_back(*v);
    }
    if (!in_scale(scale, score)) {
      std::string shown;
      for (const auto& c : std::vector<std::string>(cols.begin() + 1, cols.end()))
        shown += (shown.empty() ? "" : ",") + std::string(text::trim(c));
      throw ParseError("score " + shown + " for word '" + word + "' is outside the " +
                           std::string(to_string(scale)) + " scale",
                       line_no);
    }
    if (!lex.entries.emplace(word, std::move(score)).second) ++lex.duplicates;
  }
  return lex;
}

RawLexicon ingest_lexicon(const std::filesystem::path& path, Scale scale,
                          const std::string& language, const vocabfilter::PosLexicon* lemmatizer) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open lexicon " + path.string());
  return ingest_lexicon(in, path.stem().string(), scale, language, lemmatizer);
}

Triple pseudo_counts(Scale scale, const std::vector<double>& score) {
  switch (scale) {
    case Scale::BINARY:
    case Scale::TERNARY:
      if (score[0] > 0) return {1.0, 0.0, 0.0};
      if (score[0] < 0) return {0.0, 1.0, 0.0};
      return {0.0, 0.0, 1.0};
    case Scale::CONTINUOUS: {
      const double c = score[0];
      return {std::max(c, 0.0), std::max(-c, 0.0), 1.0 - std::abs(c)};
    }
    case Scale::PROBABILITY_TRIPLE: return {score[0], score[1], score[2]};
  }
  return {0.0, 0.0, 0.0};
}

Triple dirichlet_mean(const Triple& alpha) {
  const double total = alpha[0] + alpha[1] + alpha[2];
  return {alpha[0] / total, alpha[1] / total, alpha[2] / total};
}

SentimentClass argmax_with_ties(const Triple& scores) {
  // Preference order on ties: NEU, POS, NEG.
  constexpr std::array<SentimentClass, 3> order = {SentimentClass::NEU, SentimentClass::POS,
                                                   SentimentClass::NEG};
  SentimentClass best = order[0];
  for (auto s : order)
    if (scores[index(s)] > scores[index(best)]) best = s;
  return best;
}

FusedLexicon::FusedLexicon(std::map<std::string, Triple> concentrations)
    : entries_(std::move(concentrations)) {
  for (const auto& [w, a] : entries_)
    for (double x : a)
      if (!(x > 0.0) || !std::isfinite(x))
        throw Error("non-positive Dirichlet concentration for word '" + w + "'");
}

const Triple* FusedLexicon::concentration(const std::string& word) const {
  auto it = entries_.find(word);
  return it == entries_.end() ? nullptr : &it->second;
}

std::optional<Triple> FusedLexicon::expectation(const std::string& word) const {
  if (const auto* a = concentration(word)) return dirichlet_mean(*a);
  return std::nullopt;
}

std::optional<SentimentClass> FusedLexicon::argmax_class(const std::string& word) const {
  if (auto e = expectation(word)) return argmax_with_ties(*e);
  return std::nullopt;
}

namespace detail {

namespace {

double log_beta(const Triple& a) {
  return std::lgamma(a[0]) + std::lgamma(a[1]) + std::lgamma(a[2]) -
         std::lgamma(a[0] + a[1] + a[2]);
}

std::array<double, 9> row_softmax(const std::array<double, 9>& logits) {
  std::array<double, 9> out{};
  for (int k = 0; k < 3; ++k) {
    const double mx = std::max({logits[3 * k], logits[3 * k + 1], logits[3 * k + 2]});
    double z = 0.0;
    for (int s = 0; s < 3; ++s) z += (out[3 * k + s] = std::exp(logits[3 * k + s] - mx));
    for (int s = 0; s < 3; ++s) out[3 * k + s] /= z;
  }
  return out;
}

struct WordTerms {
  Triple gamma;
  Triple elog;  // E[log z_k]
};

WordTerms word_terms(const Triple& log_conc) {
  WordTerms t{};
  double g0 = 0.0;
  for (int k = 0; k < 3; ++k) g0 += (t.gamma[k] = std::exp(log_conc[k]));
  const double dg0 = boost::math::digamma(g0);
  for (int k = 0; k < 3; ++k) t.elog[k] = boost::math::digamma(t.gamma[k]) - dg0;
  return t;
}

// KL(Dir(gamma) || Dir(prior)).
double dirichlet_kl(const Triple& gamma, const Triple& prior, const Triple& elog) {
  double kl = log_beta(prior) - log_beta(gamma);
  for (int k = 0; k < 3; ++k) kl += (gamma[k] - prior[k]) * elog[k];
  return kl;
}

// Adds the gradient contribution of `words` into `grad`. Word parameters get
// their exact gradient; decoder gradients are multiplied by `decoder_scale`.
void accumulate_gradient(const VariationalProblem& p, const VariationalState& st,
                         const std::vector<std::vector<std::size_t>>& obs_by_word,
                         const std::vector<std::size_t>& words, double decoder_scale,
                         VariationalState& grad) {
  std::vector<std::array<double, 9>> decoders(p.n_views);
  for (std::size_t v = 0; v < p.n_views; ++v) decoders[v] = row_softmax(st.view_logits[v]);
  std::vector<std::array<double, 9>> moments(p.n_views, std::array<double, 9>{});

  for (auto w : words) {
    const auto t = word_terms(st.log_conc[w]);
    Triple n{};  // expected latent counts
    for (auto oi : obs_by_word[w]) {
      const auto& o = p.obs[oi];
      const auto& B = decoders[o.view];
      for (int s = 0; s < 3; ++s) {
        if (o.counts[s] == 0.0) continue;
        Triple phi{};
        double z = 0.0;
        for (int k = 0; k < 3; ++k) z += (phi[k] = std::exp(t.elog[k]) * B[3 * k + s]);
        for (int k = 0; k < 3; ++k) {
          const double r = o.counts[s] * phi[k] / z;
          n[k] += r;
          moments[o.view][3 * k + s] += r;
        }
      }
    }
    const double g0 = t.gamma[0] + t.gamma[1] + t.gamma[2];
    const double a0 = p.prior[0] + p.prior[1] + p.prior[2];
    const double tg0 = boost::math::trigamma(g0);
    const double shared = tg0 * (n[0] + n[1] + n[2] - g0 + a0);
    for (int j = 0; j < 3; ++j) {
      const double d_gamma =
          (n[j] - t.gamma[j] + p.prior[j]) * boost::math::trigamma(t.gamma[j]) - shared;
      grad.log_conc[w][j] += d_gamma * t.gamma[j];
    }
  }
  for (std::size_t v = 0; v < p.n_views; ++v) {
    const auto& B = decoders[v];
    const auto& M = moments[v];
    for (int k = 0; k < 3; ++k) {
      const double row = M[3 * k] + M[3 * k + 1] + M[3 * k + 2];
      for (int s = 0; s < 3; ++s)
        grad.view_logits[v][3 * k + s] += decoder_scale * (M[3 * k + s] - B[3 * k + s] * row);
    }
  }
}

std::vector<std::vector<std::size_t>> group_obs(const VariationalProblem& p) {
  std::vector<std::vector<std::size_t>> by_word(p.n_words);
  for (std::size_t i = 0; i < p.obs.size(); ++i) by_word[p.obs[i].word].push_back(i);
  return by_word;
}

VariationalState zeros_like(const VariationalState& st) {
  VariationalState z;
  z.log_conc.assign(st.log_conc.size(), Triple{});
  z.view_logits.assign(st.view_logits.size(), std::array<double, 9>{});
  return z;
}

}  // namespace

double evidence_bound(const VariationalProblem& p, const VariationalState& st) {
  std::vector<std::array<double, 9>> decoders(p.n_views);
  for (std::size_t v = 0; v < p.n_views; ++v) decoders[v] = row_softmax(st.view_logits[v]);
  std::vector<WordTerms> terms(p.n_words);
  double bound = 0.0;
  for (std::size_t w = 0; w < p.n_words; ++w) {
    terms[w] = word_terms(st.log_conc[w]);
    bound -= dirichlet_kl(terms[w].gamma, p.prior, terms[w].elog);
  }
  for (const auto& o : p.obs) {
    const auto& t = terms[o.word];
    const auto& B = decoders[o.view];
    for (int s = 0; s < 3; ++s) {
      if (o.counts[s] == 0.0) continue;
      double z = 0.0;
      for (int k = 0; k < 3; ++k) z += std::exp(t.elog[k]) * B[3 * k + s];
      bound += o.counts[s] * std::log(z);
    }
  }
  return bound;
}

VariationalState evidence_bound_gradient(const VariationalProblem& p, const VariationalState& st) {
  auto grad = zeros_like(st);
  std::vector<std::size_t> all(p.n_words);
  std::iota(all.begin(), all.end(), 0);
  accumulate_gradient(p, st, group_obs(p), all, 1.0, grad);
  return grad;
}

}  // namespace detail

namespace {

FusedLexicon fuse_pooled(const std::vector<RawLexicon>& views, const FusionConfig& config) {
  std::map<std::string, Triple> alpha;
  for (const auto& view : views) {
    for (const auto& [word, score] : view.entries) {
      auto [it, fresh] = alpha.try_emplace(word, config.base_prior);
      const auto pc = pseudo_counts(view.scale, score);
      for (int k = 0; k < 3; ++k) it->second[k] += config.view_weight * pc[k];
    }
  }
  return FusedLexicon(std::move(alpha));
}

FusedLexicon fuse_variational(const std::vector<RawLexicon>& views, const FusionConfig& config) {
  using detail::VariationalProblem;
  using detail::VariationalState;

  std::map<std::string, std::size_t> word_index;
  for (const auto& view : views)
    for (const auto& [word, score] : view.entries) word_index.try_emplace(word, 0);
  std::vector<std::string> words;
  for (auto& [w, i] : word_index) {
    i = words.size();
    words.push_back(w);
  }

  VariationalProblem problem;
  problem.n_words = words.size();
  problem.n_views = views.size();
  problem.prior = config.base_prior;
  for (std::size_t v = 0; v < views.size(); ++v) {
    for (const auto& [word, score] : views[v].entries) {
      auto pc = pseudo_counts(views[v].scale, score);
      for (auto& c : pc) c *= config.view_weight;
      problem.obs.push_back({word_index.at(word), v, pc});
    }
  }

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> noise(0.0, 0.01);
  VariationalState state;
  state.log_conc.resize(problem.n_words);
  for (std::size_t w = 0; w < problem.n_words; ++w)
    for (int k = 0; k < 3; ++k) state.log_conc[w][k] = std::log(problem.prior[k]);
  for (const auto& o : problem.obs)
    for (int k = 0; k < 3; ++k)
      state.log_conc[o.word][k] = std::log(std::exp(state.log_conc[o.word][k]) + o.counts[k]);
  // Decoders start near the identity so latent class k stays aligned with
  // observed class k.
  state.view_logits.assign(problem.n_views, std::array<double, 9>{});
  for (auto& L : state.view_logits)
    for (int k = 0; k < 3; ++k)
      for (int s = 0; s < 3; ++s) L[3 * k + s] = (k == s ? std::log(8.0) : 0.0) + noise(rng);

  const auto obs_by_word = detail::group_obs(problem);

  const std::size_t n_params = 3 * problem.n_words + 9 * problem.n_views;
  Adam adam(n_params, AdamConfig{config.learning_rate, 0.9, 0.999, 1e-8});
  std::vector<double> flat(n_params), flat_grad(n_params);
  auto pack = [&](const VariationalState& s, std::vector<double>& out, double sign) {
    std::size_t i = 0;
    for (const auto& t : s.log_conc)
      for (double x : t) out[i++] = sign * x;
    for (const auto& L : s.view_logits)
      for (double x : L) out[i++] = sign * x;
  };
  auto unpack = [&](const std::vector<double>& in, VariationalState& s) {
    std::size_t i = 0;
    for (auto& t : s.log_conc)
      for (double& x : t) x = in[i++];
    for (auto& L : s.view_logits)
      for (double& x : L) x = in[i++];
  };

  std::vector<std::size_t> order(problem.n_words);
  std::iota(order.begin(), order.end(), 0);
  const std::size_t batch = std::max<std::size_t>(1, config.batch_size);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t stop = std::min(order.size(), start + batch);
      std::vector<std::size_t> subset(order.begin() + static_cast<std::ptrdiff_t>(start),
                                      order.begin() + static_cast<std::ptrdiff_t>(stop));
      VariationalState grad;
      grad.log_conc.assign(problem.n_words, Triple{});
      grad.view_logits.assign(problem.n_views, std::array<double, 9>{});
      const double scale = static_cast<double>(order.size()) / static_cast<double>(subset.size());
      detail::accumulate_gradient(problem, state, obs_by_word, subset, scale, grad);
      // Ascent on the bound is descent on its negation.
      pack(state, flat, 1.0);
      pack(grad, flat_grad, -1.0);
      adam.step(flat, flat_grad);
      unpack(flat, state);
    }
  }

  std::map<std::string, Triple> out;
  for (std::size_t w = 0; w < problem.n_words; ++w) {
    Triple a{};
    for (int k = 0; k < 3; ++k) a[k] = std::exp(state.log_conc[w][k]);
    out.emplace(words[w], a);
  }
  return FusedLexicon(std::move(out));
}

}  // namespace

FusedLexicon fuse(const std::vector<RawLexicon>& views, FusionStrategy strategy,
                  const FusionConfig& config) {
  if (views.empty()) throw Error("fuse needs at least one lexicon view");
  if (!(config.view_weight > 0.0)) throw Error("view_weight must be positive");
  for (double a : config.base_prior)
    if (!(a > 0.0)) throw Error("base prior must be positive");
  return strategy == FusionStrategy::POOLED ? fuse_pooled(views, config)
                                            : fuse_variational(views, config);
}

SentimentClass classify_text(const FusedLexicon& lex, const std::vector<std::string>& tokens) {
  Triple sum{};
  std::size_t matched = 0;
  for (const auto& tok : tokens) {
    if (auto e = lex.expectation(tok)) {
      for (int k = 0; k < 3; ++k) sum[k] += (*e)[k];
      ++matched;
    }
  }
  if (matched == 0) return SentimentClass::NEU;
  for (auto& x : sum) x /= static_cast<double>(matched);
  return argmax_with_ties(sum);
}

Evaluation evaluate_lexicon(const FusedLexicon& lex, const std::vector<LabeledText>& corpus) {
  if (corpus.empty()) throw Error("evaluation corpus is empty");
  // confusion[gold][pred]
  std::array<std::array<std::size_t, 3>, 3> confusion{};
  for (const auto& item : corpus) {
    const auto pred = classify_text(lex, item.tokens);
    ++confusion[index(item.gold)][index(pred)];
  }
  Evaluation ev;
  std::size_t correct = 0;
  for (int c = 0; c < 3; ++c) {
    correct += confusion[c][c];
    std::size_t gold_total = 0, pred_total = 0;
    for (int o = 0; o < 3; ++o) {
      gold_total += confusion[c][o];
      pred_total += confusion[o][c];
    }
    if (gold_total == 0 && pred_total == 0) {
      ev.absent_classes.push_back(static_cast<SentimentClass>(c));
      ev.per_class_f1[c] = 0.0;
      continue;
    }
    const double tp = static_cast<double>(confusion[c][c]);
    // F1 = 2TP / (|gold| + |pred|), which is 0 whenever TP is 0.
    ev.per_class_f1[c] = 2.0 * tp / static_cast<double>(gold_total + pred_total);
  }
  ev.macro_f1 = (ev.per_class_f1[0] + ev.per_class_f1[1] + ev.per_class_f1[2]) / 3.0;
  ev.accuracy = static_cast<double>(correct) / static_cast<double>(corpus.size());
  return ev;
}

void write_fused(const FusedLexicon& lex, std::ostream& out) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [w, a] : lex.entries()) j[w] = {a[0], a[1], a[2]};
  out << j.dump(1) << '\n';
}

FusedLexicon read_fused(std::istream& in) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed fused lexicon: ") + e.what(), 0);
  }
  if (!j.is_object()) throw ParseError("fused lexicon must be a JSON object", 0);
  std::map<std::string, Triple> entries;
  for (const auto& [w, a] : j.items()) {
    if (!a.is_array() || a.size() != 3) throw ParseError("bad concentration for '" + w + "'", 0);
    entries.emplace(w, Triple{a[0].get<double>(), a[1].get<double>(), a[2].get<double>()});
  }
  return FusedLexicon(std::move(entries));
}

}  // namespace stanceprobe::lexfusion
