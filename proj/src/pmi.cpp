#include "stanceprobe/pmi.hpp"

#include <cmath>
#include <ostream>

#include "stanceprobe/text.hpp"

namespace stanceprobe::pmi {

void CountTable::add(GenderClass g, const std::string& lemma, double weight) {
  if (weight < 0.0) throw Error("negative co-occurrence weight");
  cells_[{g, lemma}] += weight;
  gender_totals_[g] += weight;
  word_totals_[lemma] += weight;
  grand_total_ += weight;
}

double CountTable::count(GenderClass g, const std::string& lemma) const {
  auto it = cells_.find({g, lemma});
  return it == cells_.end() ? 0.0 : it->second;
}

double CountTable::gender_total(GenderClass g) const {
  auto it = gender_totals_.find(g);
  return it == gender_totals_.end() ? 0.0 : it->second;
}

double CountTable::word_total(const std::string& lemma) const {
  auto it = word_totals_.find(lemma);
  return it == word_totals_.end() ? 0.0 : it->second;
}

std::vector<GenderClass> CountTable::genders() const {
  std::vector<GenderClass> out;
  for (auto g : kAllGenders)
    if (gender_total(g) > 0.0) out.push_back(g);
  return out;
}

std::vector<std::string> CountTable::words() const {
  std::vector<std::string> out;
  for (const auto& [w, total] : word_totals_) out.push_back(w);
  return out;
}

CountTable cooccurrence_counts(const vocabfilter::FilteredProbeSet& data, Weighting weighting) {
  if (data.entities.empty()) throw Error("no entities to count");
  CountTable table;
  for (const auto& e : data.entities)
    for (const auto& l : e.lemmas)
      table.add(e.gender, l.lemma, weighting == Weighting::UNIT ? 1.0 : l.prob);
  return table;
}

SmoothedEstimates smoothed_estimates(const CountTable& table, double k) {
  if (k < 0.0) throw Error("smoothing constant must be non-negative");
  if (!(table.grand_total() > 0.0)) throw Error("count table is empty");
  const auto genders = table.genders();
  const auto words = table.words();
  const double denom =
      table.grand_total() + k * static_cast<double>(genders.size() * words.size());
  SmoothedEstimates est;
  for (auto g : genders) {
    for (const auto& w : words) {
      const double p = (table.count(g, w) + k) / denom;
      est.joint[{g, w}] = p;
      est.gender[g] += p;
      est.word[w] += p;
    }
  }
  return est;
}

PmiTable compute_pmi(const CountTable& table, double smoothing_k) {
  const auto est = smoothed_estimates(table, smoothing_k);
  PmiTable out;
  for (const auto& [cell, joint] : est.joint) {
    if (joint == 0.0) continue;
    const double pg = est.gender.at(cell.first);
    const double pw = est.word.at(cell.second);
    out[cell] = std::log2(joint / (pg * pw));
  }
  return out;
}

void write_pmi_csv(const CountTable& table, const PmiTable& pmi, double min_count,
                   std::ostream& out) {
  constexpr std::array<GenderClass, 3> order = {GenderClass::FEMALE, GenderClass::MALE,
                                                GenderClass::OTHER};
  out << "word";
  for (auto g : order) out << ",PMI_" << to_string(g);
  for (auto g : order) out << ",count_" << to_string(g);
  out << '\n';
  for (const auto& w : table.words()) {
    if (table.word_total(w) < min_count) continue;
    out << text::csv_escape(w);
    for (auto g : order) {
      out << ',';
      if (auto it = pmi.find({g, w}); it != pmi.end()) out << format_double(it->second);
    }
    for (auto g : order) out << ',' << format_double(table.count(g, w));
    out << '\n';
  }
}

}  // namespace stanceprobe::pmi
