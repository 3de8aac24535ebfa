#include "stanceprobe/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>

#include <Eigen/Dense>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "stanceprobe/text.hpp"

namespace stanceprobe::stats {

std::optional<double> sentiment_frequency(const lvm::DeviationRanking& ranking,
                                          const lexfusion::FusedLexicon& lexicon,
                                          SentimentClass sentiment) {
  std::size_t covered = 0, hits = 0;
  for (const auto& item : ranking.items) {
    const auto cls = lexicon.argmax_class(item.lemma);
    if (!cls) continue;
    ++covered;
    if (*cls == sentiment) ++hits;
  }
  if (covered == 0) return std::nullopt;
  return static_cast<double>(hits) / static_cast<double>(covered);
}

namespace {

double mean(const std::vector<double>& x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sample_variance(const std::vector<double>& x, double mu) {
  double ss = 0.0;
  for (double v : x) ss += (v - mu) * (v - mu);
  return ss / static_cast<double>(x.size() - 1);
}

double two_sided_t_p(double t, double df) {
  if (std::isnan(t)) return 1.0;
  if (std::isinf(t)) return 0.0;
  boost::math::students_t dist(df);
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
}

}  // namespace

TTest welch_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2) throw Error("welch_test needs at least two values per group");
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double ma = mean(a), mb = mean(b);
  const double va = sample_variance(a, ma) / na, vb = sample_variance(b, mb) / nb;
  const double se2 = va + vb;
  TTest r;
  if (se2 == 0.0) {
    r.df = na + nb - 2.0;
    if (ma == mb) return {0.0, 1.0, r.df};
    r.t = ma > mb ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    r.p = 0.0;
    return r;
  }
  r.t = (ma - mb) / std::sqrt(se2);
  r.df = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
  r.p = two_sided_t_p(r.t, r.df);
  return r;
}

std::vector<bool> bonferroni(const std::vector<double>& p_values, std::size_t m, double family_alpha) {
  if (m == 0) throw Error("bonferroni needs m >= 1");
  const double threshold = family_alpha / static_cast<double>(m);
  std::vector<bool> flags;
  flags.reserve(p_values.size());
  for (double p : p_values) flags.push_back(p < threshold);
  return flags;
}

const Coefficient* AnovaResult::find(const std::string& term) const {
  for (const auto& c : coefficients)
    if (c.term == term) return &c;
  return nullptr;
}

Design dummy_design(const std::vector<Observation>& obs, const std::vector<std::string>& factors,
                    const std::map<std::string, std::string>& reference_levels) {
  Design d;
  d.terms.push_back("Intercept");
  std::vector<std::pair<std::string, std::string>> columns;  // (factor, level)
  for (const auto& f : factors) {
    std::set<std::string> levels;
    for (std::size_t i = 0; i < obs.size(); ++i) {
      auto it = obs[i].factors.find(f);
      if (it == obs[i].factors.end())
        throw Error("observation " + std::to_string(i) + " has no level for factor '" + f + "'");
      levels.insert(it->second);
    }
    if (levels.size() < 2) throw Error("factor '" + f + "' needs at least two levels");
    std::string ref = *levels.begin();
    if (auto it = reference_levels.find(f); it != reference_levels.end()) {
      if (!levels.contains(it->second))
        throw Error("reference level '" + it->second + "' not observed for factor '" + f + "'");
      ref = it->second;
    }
    d.reference_levels[f] = ref;
    for (const auto& lvl : levels) {
      if (lvl == ref) continue;
      columns.emplace_back(f, lvl);
      d.terms.push_back(f + "=" + lvl);
    }
  }
  for (const auto& o : obs) {
    std::vector<double> row{1.0};
    for (const auto& [f, lvl] : columns) row.push_back(o.factors.at(f) == lvl ? 1.0 : 0.0);
    d.rows.push_back(std::move(row));
  }
  return d;
}

AnovaResult anova_ols(const std::vector<Observation>& obs, const std::vector<std::string>& factors,
                      const std::map<std::string, std::string>& reference_levels) {
  if (obs.empty()) throw Error("anova_ols needs observations");
  const auto design = dummy_design(obs, factors, reference_levels);
  const auto n = static_cast<Eigen::Index>(obs.size());
  const auto k = static_cast<Eigen::Index>(design.terms.size());
  if (n - k < 1)
    throw Error("no residual degrees of freedom: " + std::to_string(n) + " observations for " +
                std::to_string(k) + " terms");

  Eigen::MatrixXd X(n, k);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) X(i, j) = design.rows[i][j];
    y(i) = obs[i].value;
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  if (qr.rank() < k) {
    std::string aliased;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index j = qr.rank(); j < k; ++j)
      aliased += (aliased.empty() ? "" : ", ") + design.terms[perm(j)];
    throw Error("design matrix is rank deficient; aliased terms: " + aliased);
  }
  const Eigen::VectorXd beta = qr.solve(y);
  const Eigen::VectorXd resid = y - X * beta;
  const double rss = resid.squaredNorm();
  const double ybar = y.mean();
  const double tss = (y.array() - ybar).square().sum();
  const auto df = static_cast<double>(n - k);
  const double sigma2 = rss / df;

  // (X'X)^-1 = P R^-1 R^-T P^T from the pivoted QR factors.
  const Eigen::MatrixXd R = qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd Rinv =
      R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
  const Eigen::MatrixXd xtx_inv_perm = Rinv * Rinv.transpose();
  const auto& P = qr.colsPermutation();
  const Eigen::MatrixXd xtx_inv = P * xtx_inv_perm * P.transpose();

  AnovaResult result;
  result.residual_df = static_cast<std::size_t>(n - k);
  result.reference_levels = design.reference_levels;
  for (Eigen::Index j = 0; j < k; ++j) {
    Coefficient c;
    c.term = design.terms[j];
    if (j > 0) {
      const auto eq = c.term.find('=');
      c.factor = c.term.substr(0, eq);
      c.level = c.term.substr(eq + 1);
    }
    c.estimate = beta(j);
    c.std_err = std::sqrt(std::max(0.0, sigma2 * xtx_inv(j, j)));
    if (c.std_err > 0.0) {
      c.t = c.estimate / c.std_err;
      c.p = two_sided_t_p(c.t, df);
    } else if (c.estimate != 0.0) {
      c.t = std::copysign(std::numeric_limits<double>::infinity(), c.estimate);
      c.p = 0.0;
    }
    result.coefficients.push_back(std::move(c));
  }
  result.residuals.assign(resid.data(), resid.data() + n);
  result.r_squared = tss > 0.0 ? 1.0 - rss / tss : 0.0;

  const auto df_model = static_cast<double>(k - 1);
  if (df_model > 0.0 && tss > 0.0) {
    if (rss == 0.0) {
      result.model_f = std::numeric_limits<double>::infinity();
      result.model_p = 0.0;
    } else {
      result.model_f = ((tss - rss) / df_model) / sigma2;
      boost::math::fisher_f dist(df_model, df);
      result.model_p = boost::math::cdf(boost::math::complement(dist, std::max(0.0, result.model_f)));
    }
  }
  return result;
}

std::map<std::string, double> supersense_frequency(
    const lvm::DeviationRanking& ranking, const std::map<std::string, std::string>& supersenses) {
  std::map<std::string, double> freq;
  if (ranking.items.empty()) return freq;
  for (const auto& item : ranking.items) {
    auto it = supersenses.find(item.lemma);
    freq[it == supersenses.end() ? "UNKNOWN" : it->second] += 1.0;
  }
  for (auto& [cls, v] : freq) v /= static_cast<double>(ranking.items.size());
  return freq;
}

std::map<std::string, std::string> read_supersense_map(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty() || line.front() == '#') continue;
    const auto cols = text::split(line, '\t');
    if (cols.size() != 2) throw ParseError("expected lemma<TAB>class", line_no);
    out[std::string(text::trim(cols[0]))] = std::string(text::trim(cols[1]));
  }
  return out;
}

namespace {

std::string fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

void write_anova_csv(const AnovaResult& r, std::ostream& out) {
  out << "term,estimate,std_err,t,p\n";
  for (const auto& c : r.coefficients)
    out << text::csv_escape(c.term) << ',' << format_double(c.estimate) << ','
        << format_double(c.std_err) << ',' << format_double(c.t) << ',' << format_double(c.p)
        << '\n';
  out << "F," << format_double(r.model_f) << ",,,\n";
  out << "P-value," << format_double(r.model_p) << ",,,\n";
  out << "residual_df," << r.residual_df << ",,,\n";
}

void write_anova_table(const std::vector<std::pair<std::string, AnovaResult>>& results,
                       const std::vector<std::string>& factors, std::ostream& out) {
  out << "Parameter";
  for (const auto& [label, r] : results) out << ',' << text::csv_escape(label);
  out << '\n';
  auto cell = [](const Coefficient* c) {
    if (!c) return std::string();
    return fixed4(c->estimate) + (c->p < 0.05 ? "*" : "");
  };
  out << "Intercept";
  for (const auto& [label, r] : results) out << ',' << cell(r.find("Intercept"));
  out << '\n';
  for (const auto& f : factors) {
    std::set<std::string> levels;
    for (const auto& [label, r] : results)
      for (const auto& c : r.coefficients)
        if (c.factor == f) levels.insert(c.level);
    if (levels.empty()) continue;
    out << text::csv_escape(f) << std::string(results.size(), ',') << '\n';
    for (const auto& lvl : levels) {
      out << text::csv_escape(lvl);
      for (const auto& [label, r] : results) out << ',' << cell(r.find(f + "=" + lvl));
      out << '\n';
    }
  }
  out << "P-value";
  for (const auto& [label, r] : results) out << ',' << fixed4(r.model_p);
  out << '\n';
}

}  // namespace stanceprobe::stats
