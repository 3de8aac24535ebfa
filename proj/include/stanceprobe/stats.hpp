#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stanceprobe/lexfusion.hpp"
#include "stanceprobe/lvm.hpp"
#include "stanceprobe/types.hpp"

namespace stanceprobe::stats {

/// Fraction of ranked lemmas whose most likely lexicon class is `sentiment`.
/// Lemmas missing from the lexicon do not count; nullopt when none is covered.
std::optional<double> sentiment_frequency(const lvm::DeviationRanking& ranking,
                                          const lexfusion::FusedLexicon& lexicon,
                                          SentimentClass sentiment);

struct TTest {
  double t = 0.0;
  double p = 1.0;
  double df = 0.0;
};

/// Two-sided Welch unequal-variance t-test with Welch-Satterthwaite degrees
/// of freedom. Both samples need at least two values.
TTest welch_test(const std::vector<double>& a, const std::vector<double>& b);

/// flag_i = p_i < 0.05 / m.
std::vector<bool> bonferroni(const std::vector<double>& p_values, std::size_t m,
                             double family_alpha = 0.05);

struct Observation {
  double value = 0.0;
  std::map<std::string, std::string> factors;  // factor name -> level
  GenderClass gender = GenderClass::MALE;
  SentimentClass sentiment = SentimentClass::POS;
};

struct Coefficient {
  std::string term;    // "Intercept" or "<factor>=<level>"
  std::string factor;  // empty for the intercept
  std::string level;
  double estimate = 0.0;
  double std_err = 0.0;
  double t = 0.0;
  double p = 1.0;
};

struct AnovaResult {
  std::vector<Coefficient> coefficients;  // intercept first, then factors in the order given
  std::map<std::string, std::string> reference_levels;
  double model_f = 0.0;
  double model_p = 1.0;
  std::size_t residual_df = 0;
  double r_squared = 0.0;
  std::vector<double> residuals;

  const Coefficient* find(const std::string& term) const;
};

/// Treatment-coded design: intercept column, then one indicator column per
/// non-reference level of each factor (levels in lexicographic order).
struct Design {
  std::vector<std::string> terms;
  std::vector<std::vector<double>> rows;
  std::map<std::string, std::string> reference_levels;
};

Design dummy_design(const std::vector<Observation>& obs, const std::vector<std::string>& factors,
                    const std::map<std::string, std::string>& reference_levels = {});

/// Main-effects OLS with treatment coding against reference levels (default:
/// lexicographically smallest level), per-coefficient two-sided t-tests and
/// the overall F-test. Throws on fewer than two levels for a factor, on
/// rank deficiency (listing the aliased terms) or with no residual degrees
/// of freedom.
AnovaResult anova_ols(const std::vector<Observation>& obs, const std::vector<std::string>& factors,
                      const std::map<std::string, std::string>& reference_levels = {});

/// Fraction of ranked lemmas per supersense class; unmapped lemmas go to
/// "UNKNOWN".
std::map<std::string, double> supersense_frequency(const lvm::DeviationRanking& ranking,
                                                   const std::map<std::string, std::string>& supersenses);

/// TSV `lemma<TAB>class`, `#` comments allowed.
std::map<std::string, std::string> read_supersense_map(std::istream& in);

/// Long-form ANOVA table: term, estimate, std_err, t, p, then model rows.
void write_anova_csv(const AnovaResult& result, std::ostream& out);

/// Wide table with one estimate column per labelled result. Rows: Intercept,
/// a header row per factor followed by its non-reference levels, then the
/// model P-value. Estimates with p < 0.05 are suffixed with '*'.
void write_anova_table(const std::vector<std::pair<std::string, AnovaResult>>& results,
                       const std::vector<std::string>& factors, std::ostream& out);

}  // namespace stanceprobe::stats
