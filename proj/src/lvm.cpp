#include "stanceprobe/lvm.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "stanceprobe/adam.hpp"

namespace stanceprobe::lvm {

std::optional<std::size_t> gender_slot(GenderClass g) {
  switch (g) {
    case GenderClass::MALE: return 0;
    case GenderClass::FEMALE: return 1;
    case GenderClass::OTHER: return std::nullopt;
  }
  return std::nullopt;
}

namespace {

constexpr std::array<GenderClass, kGenders> kSlotGender = {GenderClass::MALE, GenderClass::FEMALE};

// Entity mass per gender and word, plus total mass per word.
struct Aggregates {
  std::array<std::vector<double>, kGenders> counts;
  std::vector<double> mass;
};

Aggregates aggregate(const ModelParams& params, const vocabfilter::FilteredProbeSet& data) {
  Aggregates agg;
  for (auto& c : agg.counts) c.assign(params.size(), 0.0);
  agg.mass.assign(params.size(), 0.0);
  for (const auto& e : data.entities) {
    const auto g = gender_slot(e.gender);
    if (!g) continue;
    for (const auto& l : e.lemmas) {
      const auto w = params.word_index(l.lemma);
      if (!w) throw Error("lemma '" + l.lemma + "' of entity " + e.entity_id + " is not in the vocabulary");
      agg.counts[*g][*w] += l.prob;
      agg.mass[*w] += l.prob;
    }
  }
  return agg;
}

// Covered vocabulary words with their KL weight u(w) and target q(s | w).
struct Targets {
  std::vector<std::size_t> words;
  std::vector<double> weight;
  std::vector<lexfusion::Triple> q;
};

Targets lexicon_targets(const ModelParams& params, const Aggregates& agg,
                        const lexfusion::FusedLexicon& lexicon) {
  Targets t;
  double total = 0.0;
  for (std::size_t w = 0; w < params.size(); ++w) {
    if (auto q = lexicon.expectation(params.vocab[w])) {
      t.words.push_back(w);
      t.weight.push_back(agg.mass[w]);
      t.q.push_back(*q);
      total += agg.mass[w];
    }
  }
  for (auto& u : t.weight)
    u = total > 0.0 ? u / total : 1.0 / static_cast<double>(t.words.size());
  return t;
}

struct Forward {
  std::size_t V = 0;
  std::vector<double> P;  // p(w | s, g) at [(s * kGenders + g) * V + w]
  std::array<std::array<double, kSentiments>, kGenders> pi{};

  double word(std::size_t s, std::size_t g, std::size_t w) const { return P[(s * kGenders + g) * V + w]; }
};

void softmax_inplace(std::span<double> x) {
  const double mx = *std::max_element(x.begin(), x.end());
  double z = 0.0;
  for (auto& v : x) z += (v = std::exp(v - mx));
  for (auto& v : x) v /= z;
}

Forward forward(const ModelParams& p) {
  Forward f;
  f.V = p.size();
  f.P.resize(kSentiments * kGenders * f.V);
  for (std::size_t s = 0; s < kSentiments; ++s) {
    for (std::size_t g = 0; g < kGenders; ++g) {
      std::span<double> row(f.P.data() + (s * kGenders + g) * f.V, f.V);
      for (std::size_t w = 0; w < f.V; ++w)
        row[w] = p.m[w] + p.eta[(w * kSentiments + s) * kGenders + g];
      softmax_inplace(row);
    }
  }
  for (std::size_t g = 0; g < kGenders; ++g) {
    std::array<double, kSentiments> logits = p.sent_logits[g];
    softmax_inplace(logits);
    f.pi[g] = logits;
  }
  return f;
}

double joint(const ModelParams& p, const Forward& f, std::size_t w, std::size_t s, std::size_t g) {
  return p.gender_prior[g] * f.pi[g][s] * f.word(s, g, w);
}

double main_from(const ModelParams& p, const Forward& f, const Aggregates& agg) {
  double total = 0.0;
  for (std::size_t g = 0; g < kGenders; ++g) {
    for (std::size_t w = 0; w < f.V; ++w) {
      const double c = agg.counts[g][w];
      if (c == 0.0) continue;
      double pwg = 0.0;
      for (std::size_t s = 0; s < kSentiments; ++s) pwg += joint(p, f, w, s, g);
      total += c * std::log(pwg);
    }
  }
  return total;
}

std::array<double, kSentiments> posterior_from(const ModelParams& p, const Forward& f, std::size_t w) {
  std::array<double, kSentiments> a{};
  double z = 0.0;
  for (std::size_t s = 0; s < kSentiments; ++s) {
    for (std::size_t g = 0; g < kGenders; ++g) a[s] += joint(p, f, w, s, g);
    z += a[s];
  }
  for (auto& x : a) x /= z;
  return a;
}

double kl_from(const ModelParams& p, const Forward& f, const Targets& t) {
  double kl = 0.0;
  for (std::size_t i = 0; i < t.words.size(); ++i) {
    const auto post = posterior_from(p, f, t.words[i]);
    double term = 0.0;
    for (std::size_t s = 0; s < kSentiments; ++s)
      term += t.q[i][s] * std::log(t.q[i][s] / post[s]);
    kl += t.weight[i] * term;
  }
  return kl;
}

double l1_from(const ModelParams& p) {
  double l1 = 0.0;
  for (double x : p.eta) l1 += std::abs(x);
  return l1;
}

double loss_from(const ModelParams& p, const Forward& f, const Aggregates& agg, const Targets& t,
                 double alpha, double beta) {
  double loss = -main_from(p, f, agg);
  if (beta != 0.0) loss += beta * kl_from(p, f, t);
  if (alpha != 0.0) loss += alpha * l1_from(p);
  return loss;
}

// Loss gradient. Every term depends on the logits only through the joint
// cells J(w,s,g); `coef` holds dLoss/dlog J per cell, from which the softmax
// chain rule gives the logit gradients.
ParamGradient gradient_from(const ModelParams& p, const Forward& f, const Aggregates& agg,
                            const Targets& t, double alpha, double beta) {
  const std::size_t V = f.V;
  std::vector<double> coef(kSentiments * kGenders * V, 0.0);
  auto at = [V](std::size_t s, std::size_t g, std::size_t w) { return (s * kGenders + g) * V + w; };

  for (std::size_t g = 0; g < kGenders; ++g) {
    for (std::size_t w = 0; w < V; ++w) {
      const double c = agg.counts[g][w];
      if (c == 0.0) continue;
      std::array<double, kSentiments> j{};
      double pwg = 0.0;
      for (std::size_t s = 0; s < kSentiments; ++s) pwg += (j[s] = joint(p, f, w, s, g));
      for (std::size_t s = 0; s < kSentiments; ++s) coef[at(s, g, w)] -= c * j[s] / pwg;
    }
  }
  if (beta != 0.0) {
    for (std::size_t i = 0; i < t.words.size(); ++i) {
      const std::size_t w = t.words[i];
      std::array<std::array<double, kGenders>, kSentiments> j{};
      std::array<double, kSentiments> a{};
      double b = 0.0;
      for (std::size_t s = 0; s < kSentiments; ++s) {
        for (std::size_t g = 0; g < kGenders; ++g) a[s] += (j[s][g] = joint(p, f, w, s, g));
        b += a[s];
      }
      for (std::size_t s = 0; s < kSentiments; ++s)
        for (std::size_t g = 0; g < kGenders; ++g)
          coef[at(s, g, w)] += beta * t.weight[i] * j[s][g] * (1.0 / b - t.q[i][s] / a[s]);
    }
  }

  ParamGradient grad;
  grad.m.assign(V, 0.0);
  grad.eta.assign(p.eta.size(), 0.0);
  for (std::size_t g = 0; g < kGenders; ++g) {
    double all_s = 0.0;
    std::array<double, kSentiments> per_s{};
    for (std::size_t s = 0; s < kSentiments; ++s) {
      double row = 0.0;
      for (std::size_t w = 0; w < V; ++w) row += coef[at(s, g, w)];
      per_s[s] = row;
      all_s += row;
      for (std::size_t w = 0; w < V; ++w) {
        const double dz = coef[at(s, g, w)] - f.word(s, g, w) * row;
        grad.m[w] += dz;
        grad.eta[(w * kSentiments + s) * kGenders + g] += dz;
      }
    }
    for (std::size_t s = 0; s < kSentiments; ++s)
      grad.sent_logits[g][s] = per_s[s] - f.pi[g][s] * all_s;
  }
  if (alpha != 0.0)
    for (std::size_t i = 0; i < p.eta.size(); ++i)
      grad.eta[i] += alpha * (p.eta[i] > 0.0 ? 1.0 : (p.eta[i] < 0.0 ? -1.0 : 0.0));
  return grad;
}

void check_weights(double alpha, double beta) {
  if (alpha < 0.0 || beta < 0.0) throw Error("alpha and beta must be non-negative");
}

std::size_t flat_size(const ModelParams& p) { return p.m.size() + p.eta.size() + kGenders * kSentiments; }

void pack(const ModelParams& p, std::vector<double>& out) {
  auto it = std::copy(p.m.begin(), p.m.end(), out.begin());
  it = std::copy(p.eta.begin(), p.eta.end(), it);
  for (const auto& row : p.sent_logits) it = std::copy(row.begin(), row.end(), it);
}

void pack(const ParamGradient& g, std::vector<double>& out) {
  auto it = std::copy(g.m.begin(), g.m.end(), out.begin());
  it = std::copy(g.eta.begin(), g.eta.end(), it);
  for (const auto& row : g.sent_logits) it = std::copy(row.begin(), row.end(), it);
}

void unpack(const std::vector<double>& in, ModelParams& p) {
  auto it = in.begin();
  std::copy_n(it, p.m.size(), p.m.begin());
  it += static_cast<std::ptrdiff_t>(p.m.size());
  std::copy_n(it, p.eta.size(), p.eta.begin());
  it += static_cast<std::ptrdiff_t>(p.eta.size());
  for (auto& row : p.sent_logits) {
    std::copy_n(it, kSentiments, row.begin());
    it += kSentiments;
  }
}

}  // namespace

std::optional<std::size_t> ModelParams::word_index(const std::string& lemma) const {
  auto it = std::lower_bound(vocab.begin(), vocab.end(), lemma);
  if (it == vocab.end() || *it != lemma) return std::nullopt;
  return static_cast<std::size_t>(it - vocab.begin());
}

std::vector<std::string> build_vocab(const vocabfilter::FilteredProbeSet& data) {
  std::set<std::string> words;
  for (const auto& e : data.entities)
    if (gender_slot(e.gender))
      for (const auto& l : e.lemmas) words.insert(l.lemma);
  return {words.begin(), words.end()};
}

std::array<double, kGenders> empirical_gender_prior(const vocabfilter::FilteredProbeSet& data) {
  std::array<double, kGenders> counts{};
  for (const auto& e : data.entities)
    if (auto g = gender_slot(e.gender)) counts[*g] += 1.0;
  const double total = counts[0] + counts[1];
  if (total == 0.0) throw Error("no male or female entities in the data");
  return {counts[0] / total, counts[1] / total};
}

ModelParams init_params(std::vector<std::string> vocab, std::array<double, kGenders> gender_prior,
                        std::uint64_t seed, double sigma) {
  if (vocab.empty()) throw Error("vocabulary is empty");
  std::sort(vocab.begin(), vocab.end());
  vocab.erase(std::unique(vocab.begin(), vocab.end()), vocab.end());
  const double prior_total = gender_prior[0] + gender_prior[1];
  if (!(gender_prior[0] >= 0.0 && gender_prior[1] >= 0.0 && std::abs(prior_total - 1.0) < 1e-9))
    throw Error("gender prior must be a probability pair");

  ModelParams p;
  p.vocab = std::move(vocab);
  p.gender_prior = gender_prior;
  p.m.assign(p.vocab.size(), 0.0);
  p.eta.assign(p.vocab.size() * kSentiments * kGenders, 0.0);
  if (sigma > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, sigma);
    for (auto& x : p.m) x = normal(rng);
    for (auto& x : p.eta) x = normal(rng);
  }
  return p;
}

std::vector<double> word_dist(const ModelParams& params, SentimentClass s, std::size_t g) {
  const auto f = forward(params);
  const auto* row = f.P.data() + (index(s) * kGenders + g) * f.V;
  return {row, row + f.V};
}

std::array<double, kSentiments> sentiment_prior(const ModelParams& params, std::size_t g) {
  auto logits = params.sent_logits[g];
  softmax_inplace(logits);
  return logits;
}

double marginal_word_gender(const ModelParams& params, std::size_t w, std::size_t g) {
  const auto f = forward(params);
  double total = 0.0;
  for (std::size_t s = 0; s < kSentiments; ++s) total += joint(params, f, w, s, g);
  return total;
}

std::array<double, kSentiments> posterior_sentiment(const ModelParams& params, std::size_t w) {
  return posterior_from(params, forward(params), w);
}

double main_objective(const ModelParams& params, const vocabfilter::FilteredProbeSet& data) {
  return main_from(params, forward(params), aggregate(params, data));
}

double kl_term(const ModelParams& params, const vocabfilter::FilteredProbeSet& data,
               const lexfusion::FusedLexicon& lexicon) {
  const auto agg = aggregate(params, data);
  return kl_from(params, forward(params), lexicon_targets(params, agg, lexicon));
}

double l1_term(const ModelParams& params) { return l1_from(params); }

double total_loss(const ModelParams& params, const vocabfilter::FilteredProbeSet& data,
                  const lexfusion::FusedLexicon& lexicon, double alpha, double beta) {
  check_weights(alpha, beta);
  const auto agg = aggregate(params, data);
  return loss_from(params, forward(params), agg, lexicon_targets(params, agg, lexicon), alpha, beta);
}

ParamGradient gradients(const ModelParams& params, const vocabfilter::FilteredProbeSet& data,
                        const lexfusion::FusedLexicon& lexicon, double alpha, double beta) {
  check_weights(alpha, beta);
  const auto agg = aggregate(params, data);
  return gradient_from(params, forward(params), agg, lexicon_targets(params, agg, lexicon), alpha,
                       beta);
}

TrainResult train(const vocabfilter::FilteredProbeSet& data, const lexfusion::FusedLexicon& lexicon,
                  const TrainConfig& config) {
  check_weights(config.alpha, config.beta);
  if (config.max_steps == 0) throw Error("max_steps must be positive");
  if (!(config.learning_rate > 0.0)) throw Error("learning_rate must be positive");

  TrainResult result;
  result.alpha = config.alpha;
  result.beta = config.beta;
  result.params = init_params(build_vocab(data), empirical_gender_prior(data), config.seed,
                              config.init_sigma);
  auto& params = result.params;
  const auto agg = aggregate(params, data);
  const auto targets = lexicon_targets(params, agg, lexicon);

  Adam adam(flat_size(params),
            AdamConfig{config.learning_rate, config.adam_beta1, config.adam_beta2, config.adam_eps});
  std::vector<double> flat(flat_size(params)), flat_grad(flat_size(params));

  for (std::size_t step = 0; step < config.max_steps; ++step) {
    const auto f = forward(params);
    const double loss = loss_from(params, f, agg, targets, config.alpha, config.beta);
    if (!std::isfinite(loss)) throw Error("non-finite loss at step " + std::to_string(step));
    if (!result.loss_trace.empty() && std::abs(result.loss_trace.back() - loss) < config.tol) {
      result.loss_trace.push_back(loss);
      result.converged = true;
      return result;
    }
    result.loss_trace.push_back(loss);
    pack(params, flat);
    pack(gradient_from(params, f, agg, targets, config.alpha, config.beta), flat_grad);
    adam.step(flat, flat_grad);
    unpack(flat, params);
    ++result.steps;
  }
  const double final_loss =
      loss_from(params, forward(params), agg, targets, config.alpha, config.beta);
  if (!std::isfinite(final_loss))
    throw Error("non-finite loss at step " + std::to_string(config.max_steps));
  result.loss_trace.push_back(final_loss);
  return result;
}

std::vector<TrainResult> grid_train(const vocabfilter::FilteredProbeSet& data,
                                    const lexfusion::FusedLexicon& lexicon,
                                    const std::vector<double>& alpha_grid,
                                    const std::vector<double>& beta_grid,
                                    const TrainConfig& base_config, unsigned threads) {
  if (alpha_grid.empty() || beta_grid.empty()) throw Error("hyperparameter grids must be non-empty");
  std::vector<TrainConfig> configs;
  for (double a : alpha_grid) {
    for (double b : beta_grid) {
      auto c = base_config;
      c.alpha = a;
      c.beta = b;
      configs.push_back(c);
    }
  }
  std::vector<std::optional<TrainResult>> slots(configs.size());
  std::vector<std::exception_ptr> errors(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < configs.size();) {
      try {
        slots[i] = train(data, lexicon, configs[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(configs.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
  }
  std::vector<TrainResult> out;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    out.push_back(std::move(*slots[i]));
  }
  return out;
}

DeviationRanking deviation_ranking(const std::vector<const ModelParams*>& models,
                                   GenderClass gender, SentimentClass sentiment, std::size_t k,
                                   Averaging averaging) {
  if (models.empty()) throw Error("deviation ranking needs at least one model");
  const auto g = gender_slot(gender);
  if (!g) throw Error("deviation ranking is defined for MALE and FEMALE only");
  const auto& vocab = models.front()->vocab;
  for (const auto* m : models)
    if (m->vocab != vocab) throw Error("models in a deviation ranking must share a vocabulary");

  std::vector<double> acc(vocab.size(), 0.0);
  for (const auto* m : models)
    for (std::size_t w = 0; w < vocab.size(); ++w) {
      const double eta = m->eta_at(w, sentiment, *g);
      acc[w] += averaging == Averaging::TAU ? std::exp(eta) : eta;
    }
  const double n = static_cast<double>(models.size());
  DeviationRanking ranking;
  ranking.gender = gender;
  ranking.sentiment = sentiment;
  for (std::size_t w = 0; w < vocab.size(); ++w) {
    const double mean = acc[w] / n;
    ranking.items.push_back({vocab[w], averaging == Averaging::TAU ? mean : std::exp(mean)});
  }
  // vocab is sorted, so a stable sort leaves ties in lexicographic order.
  std::stable_sort(ranking.items.begin(), ranking.items.end(),
                   [](const RankedLemma& a, const RankedLemma& b) { return a.tau > b.tau; });
  if (ranking.items.size() > k) ranking.items.resize(k);
  return ranking;
}

DeviationRanking deviation_ranking(const std::vector<ModelParams>& models, GenderClass gender,
                                   SentimentClass sentiment, std::size_t k, Averaging averaging) {
  std::vector<const ModelParams*> ptrs;
  for (const auto& m : models) ptrs.push_back(&m);
  return deviation_ranking(ptrs, gender, sentiment, k, averaging);
}

namespace {

nlohmann::ordered_json model_json(const ModelParams& params, const TrainConfig& config) {
  nlohmann::ordered_json j;
  j["vocab"] = params.vocab;
  j["m"] = params.m;
  j["eta"] = nlohmann::ordered_json::array();
  for (std::size_t w = 0; w < params.size(); ++w) {
    auto per_word = nlohmann::ordered_json::array();
    for (auto s : kAllSentiments)
      per_word.push_back({params.eta_at(w, s, 0), params.eta_at(w, s, 1)});
    j["eta"].push_back(std::move(per_word));
  }
  for (std::size_t g = 0; g < kGenders; ++g) {
    j["sent_logits"][std::string(to_string(kSlotGender[g]))] = params.sent_logits[g];
    j["gender_prior"][std::string(to_string(kSlotGender[g]))] = params.gender_prior[g];
  }
  j["config"] = {{"alpha", config.alpha},
                 {"beta", config.beta},
                 {"learning_rate", config.learning_rate},
                 {"adam_beta1", config.adam_beta1},
                 {"adam_beta2", config.adam_beta2},
                 {"adam_eps", config.adam_eps},
                 {"max_steps", config.max_steps},
                 {"seed", config.seed},
                 {"tol", config.tol},
                 {"init_sigma", config.init_sigma}};
  return j;
}

ModelParams model_from_json(const nlohmann::json& j) {
  ModelParams p;
  p.vocab = j.at("vocab").get<std::vector<std::string>>();
  if (!std::is_sorted(p.vocab.begin(), p.vocab.end()))
    throw ParseError("model vocabulary must be sorted", 0);
  p.m = j.at("m").get<std::vector<double>>();
  if (p.m.size() != p.vocab.size()) throw ParseError("m has the wrong length", 0);
  p.eta.assign(p.vocab.size() * kSentiments * kGenders, 0.0);
  const auto& eta = j.at("eta");
  if (eta.size() != p.vocab.size()) throw ParseError("eta has the wrong length", 0);
  for (std::size_t w = 0; w < p.vocab.size(); ++w)
    for (auto s : kAllSentiments)
      for (std::size_t g = 0; g < kGenders; ++g)
        p.eta_at(w, s, g) = eta.at(w).at(index(s)).at(g).get<double>();
  for (std::size_t g = 0; g < kGenders; ++g) {
    const std::string name(to_string(kSlotGender[g]));
    const auto logits = j.at("sent_logits").at(name).get<std::vector<double>>();
    if (logits.size() != kSentiments) throw ParseError("sent_logits has the wrong length", 0);
    std::copy(logits.begin(), logits.end(), p.sent_logits[g].begin());
    p.gender_prior[g] = j.at("gender_prior").at(name).get<double>();
  }
  return p;
}

}  // namespace

void write_model(const ModelParams& params, const TrainConfig& config, std::ostream& out) {
  out << model_json(params, config).dump(1) << '\n';
}

ModelParams read_model(std::istream& in) {
  try {
    return model_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed model file: ") + e.what(), 0);
  }
}

void write_grid(const std::vector<TrainResult>& results, const TrainConfig& base_config,
                std::ostream& out) {
  nlohmann::ordered_json j;
  j["runs"] = nlohmann::ordered_json::array();
  for (const auto& r : results) {
    auto config = base_config;
    config.alpha = r.alpha;
    config.beta = r.beta;
    nlohmann::ordered_json run;
    run["alpha"] = r.alpha;
    run["beta"] = r.beta;
    run["steps"] = r.steps;
    run["converged"] = r.converged;
    run["loss_trace"] = r.loss_trace;
    run["model"] = model_json(r.params, config);
    j["runs"].push_back(std::move(run));
  }
  out << j.dump() << '\n';
}

std::vector<TrainResult> read_grid(std::istream& in) {
  try {
    const auto j = nlohmann::json::parse(in);
    std::vector<TrainResult> out;
    for (const auto& run : j.at("runs")) {
      TrainResult r;
      r.alpha = run.at("alpha").get<double>();
      r.beta = run.at("beta").get<double>();
      r.steps = run.at("steps").get<std::size_t>();
      r.converged = run.at("converged").get<bool>();
      r.loss_trace = run.at("loss_trace").get<std::vector<double>>();
      if (r.loss_trace.empty()) throw ParseError("run without a loss trace", 0);
      r.params = model_from_json(run.at("model"));
      out.push_back(std::move(r));
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed grid file: ") + e.what(), 0);
  }
}

}  // namespace stanceprobe::lvm
