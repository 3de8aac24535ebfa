#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "stanceprobe/types.hpp"
#include "stanceprobe/vocabfilter.hpp"

namespace stanceprobe::pmi {

enum class Weighting { UNIT, PROB };

/// Gender x lemma co-occurrence mass with running marginals.
class CountTable {
 public:
  void add(GenderClass g, const std::string& lemma, double weight);

  double count(GenderClass g, const std::string& lemma) const;
  double gender_total(GenderClass g) const;
  double word_total(const std::string& lemma) const;
  double grand_total() const { return grand_total_; }

  const std::map<std::pair<GenderClass, std::string>, double>& cells() const { return cells_; }
  const std::map<std::string, double>& word_totals() const { return word_totals_; }
  /// Genders with positive total mass, in enum order.
  std::vector<GenderClass> genders() const;
  std::vector<std::string> words() const;

 private:
  std::map<std::pair<GenderClass, std::string>, double> cells_;
  std::map<GenderClass, double> gender_totals_;
  std::map<std::string, double> word_totals_;
  double grand_total_ = 0.0;
};

/// UNIT adds 1 per (entity gender, lemma) occurrence, PROB adds the lemma's
/// probability.
CountTable cooccurrence_counts(const vocabfilter::FilteredProbeSet& data, Weighting weighting);

using PmiTable = std::map<std::pair<GenderClass, std::string>, double>;

/// Add-k smoothed probability estimates over the (observed gender x observed
/// lemma) grid.
struct SmoothedEstimates {
  std::map<std::pair<GenderClass, std::string>, double> joint;
  std::map<GenderClass, double> gender;
  std::map<std::string, double> word;
};

SmoothedEstimates smoothed_estimates(const CountTable& table, double smoothing_k);

/// log2 p(g,w) / (p(g) p(w)) for every grid cell. With k = 0, cells whose
/// joint mass is zero are omitted instead of reported as -inf.
PmiTable compute_pmi(const CountTable& table, double smoothing_k);

/// CSV: word, PMI per gender (female, male, other), raw count per gender.
/// Rows for words whose total count is below `min_count` are skipped;
/// omitted cells are left empty.
void write_pmi_csv(const CountTable& table, const PmiTable& pmi, double min_count,
                   std::ostream& out);

}  // namespace stanceprobe::pmi
