#include "stanceprobe/vocabfilter.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "stanceprobe/text.hpp"

namespace stanceprobe::vocabfilter {

using nlohmann::json;
using nlohmann::ordered_json;

const LexiconEntry* PosLexicon::lookup(const std::string& form) const {
  auto it = entries_.find(text::fold_case(form, language_));
  return it == entries_.end() ? nullptr : &it->second;
}

PosClass map_upos(const std::string& upos) {
  if (upos == "ADJ") return PosClass::ADJ;
  if (upos == "VERB") return PosClass::VERB;
  return PosClass::OTHER;
}

void PosLexiconBuilder::add(const std::string& form, const std::string& lemma,
                            const std::string& upos) {
  if (form.empty() || form == "_") return;
  auto folded = text::fold_case(form, language_);
  auto folded_lemma = (lemma.empty() || lemma == "_") ? folded : text::fold_case(lemma, language_);
  auto& tally = tallies_[folded];
  tally.tags.insert(map_upos(upos));
  ++tally.lemma_counts[folded_lemma];
}

std::size_t PosLexiconBuilder::add_conllu(std::istream& in) {
  std::size_t rows = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto cols = text::split(line, '\t');
    if (cols.size() < 4) continue;
    const auto& id = cols[0];
    if (id.find('-') != std::string::npos || id.find('.') != std::string::npos) continue;
    add(cols[1], cols[2], cols[3]);
    ++rows;
  }
  return rows;
}

PosLexicon PosLexiconBuilder::build() const {
  std::map<std::string, LexiconEntry> entries;
  for (const auto& [form, tally] : tallies_) {
    // std::map iterates lemmas in lexicographic order, so strict > keeps the
    // smallest lemma among equally frequent ones.
    const std::string* best = nullptr;
    std::size_t best_count = 0;
    for (const auto& [lemma, count] : tally.lemma_counts) {
      if (count > best_count) {
        best = &lemma;
        best_count = count;
      }
    }
    entries.emplace(form, LexiconEntry{tally.tags, *best});
  }
  if (entries.empty()) spdlog::warn("empty POS lexicon for language '{}'", language_);
  return PosLexicon(language_, std::move(entries));
}

PosLexicon build_pos_lexicon(const std::vector<std::istream*>& treebanks,
                             const std::string& language) {
  PosLexiconBuilder builder(language);
  for (auto* in : treebanks) builder.add_conllu(*in);
  return builder.build();
}

std::vector<std::string> FilteredProbeSet::models() const {
  std::vector<std::string> out;
  for (const auto& e : entities)
    if (out.empty() || out.back() != e.model_id) out.push_back(e.model_id);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

FilteredProbeSet FilteredProbeSet::for_model(const std::string& model_id) const {
  FilteredProbeSet out;
  out.language = language;
  out.pos_class = pos_class;
  out.top_k = top_k;
  for (const auto& e : entities)
    if (e.model_id == model_id) out.entities.push_back(e);
  return out;
}

std::size_t default_top_k(const std::string& language, PosClass pos_class) {
  if (language == "en") return 20;
  return pos_class == PosClass::ADJ ? 100 : 20;
}

FilteredProbeSet filter_probe(const corpus::ProbeSet& probe, const PosLexicon& lex,
                              PosClass pos_class, std::size_t top_k, SlotMode slot_mode) {
  if (top_k < 1) throw Error("top_k must be at least 1");
  FilteredProbeSet out;
  out.language = lex.language();
  out.pos_class = pos_class;
  out.top_k = top_k;

  struct Accum {
    GenderClass gender;
    std::map<std::string, double> mass;
  };
  std::map<std::pair<std::string, std::string>, Accum> groups;  // (model, entity)

  for (const auto& table : probe.tables()) {
    if (table.language != lex.language()) continue;
    if (slot_mode == SlotMode::PREFIX_ONLY && table.slot != Slot::PREFIX) continue;
    if (slot_mode == SlotMode::SUFFIX_ONLY && table.slot != Slot::SUFFIX) continue;
    ++out.report.tables_seen;
    auto& acc = groups.try_emplace({table.model_id, table.entity_id}, Accum{table.gender, {}})
                    .first->second;
    for (const auto& entry : table.entries) {
      const auto* le = lex.lookup(entry.token);
      if (!le) {
        ++out.report.tokens_unknown;
        continue;
      }
      if (!le->pos_tags.contains(pos_class)) {
        ++out.report.tokens_wrong_pos;
        continue;
      }
      acc.mass[le->lemma] += entry.prob;
    }
  }

  for (auto& [key, acc] : groups) {
    std::vector<LemmaProb> lemmas;
    for (const auto& [lemma, p] : acc.mass)
      if (p > 0.0) lemmas.push_back({lemma, p});
    if (lemmas.empty()) {
      ++out.report.entities_dropped;
      continue;
    }
    std::stable_sort(lemmas.begin(), lemmas.end(), [](const LemmaProb& a, const LemmaProb& b) {
      if (a.prob != b.prob) return a.prob > b.prob;
      return a.lemma < b.lemma;
    });
    if (lemmas.size() > top_k) lemmas.resize(top_k);
    double total = 0.0;
    for (const auto& l : lemmas) total += l.prob;
    for (auto& l : lemmas) l.prob /= total;
    out.entities.push_back({key.second, key.first, acc.gender, std::move(lemmas)});
  }
  return out;
}

corpus::ProbeSet to_probe_set(const FilteredProbeSet& data) {
  std::vector<corpus::ProbeTable> tables;
  for (const auto& e : data.entities) {
    corpus::ProbeTable t;
    t.model_id = e.model_id;
    t.language = data.language;
    t.entity_id = e.entity_id;
    t.gender = e.gender;
    t.slot = Slot::PREFIX;
    for (const auto& l : e.lemmas) t.entries.push_back({l.lemma, l.prob});
    tables.push_back(std::move(t));
  }
  return corpus::ProbeSet::from_tables(std::move(tables));
}

void write_filtered(const FilteredProbeSet& data, std::ostream& out) {
  ordered_json j;
  j["language"] = data.language;
  j["pos_class"] = to_string(data.pos_class);
  j["top_k"] = data.top_k;
  j["report"] = {{"tables_seen", data.report.tables_seen},
                 {"entities_dropped", data.report.entities_dropped},
                 {"tokens_unknown", data.report.tokens_unknown},
                 {"tokens_wrong_pos", data.report.tokens_wrong_pos}};
  j["entities"] = ordered_json::array();
  for (const auto& e : data.entities) {
    ordered_json ej;
    ej["entity_id"] = e.entity_id;
    ej["model_id"] = e.model_id;
    ej["gender"] = to_string(e.gender);
    ej["lemmas"] = ordered_json::array();
    for (const auto& l : e.lemmas) ej["lemmas"].push_back(ordered_json::array({l.lemma, l.prob}));
    j["entities"].push_back(std::move(ej));
  }
  out << j.dump(1) << '\n';
}

FilteredProbeSet read_filtered(std::istream& in) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed filtered probe set: ") + e.what(), 0);
  }
  FilteredProbeSet data;
  try {
    data.language = j.at("language").get<std::string>();
    const auto pos = parse_pos_class(j.at("pos_class").get<std::string>());
    if (!pos) throw ParseError("invalid pos_class", 0);
    data.pos_class = *pos;
    data.top_k = j.at("top_k").get<std::size_t>();
    if (j.contains("report")) {
      const auto& r = j["report"];
      data.report.tables_seen = r.value("tables_seen", std::size_t{0});
      data.report.entities_dropped = r.value("entities_dropped", std::size_t{0});
      data.report.tokens_unknown = r.value("tokens_unknown", std::size_t{0});
      data.report.tokens_wrong_pos = r.value("tokens_wrong_pos", std::size_t{0});
    }
    for (const auto& ej : j.at("entities")) {
      FilteredEntity e;
      e.entity_id = ej.at("entity_id").get<std::string>();
      e.model_id = ej.at("model_id").get<std::string>();
      const auto g = parse_gender(ej.at("gender").get<std::string>());
      if (!g) throw ParseError("invalid gender for entity " + e.entity_id, 0);
      e.gender = *g;
      for (const auto& lp : ej.at("lemmas"))
        e.lemmas.push_back({lp.at(0).get<std::string>(), lp.at(1).get<double>()});
      data.entities.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed filtered probe set: ") + e.what(), 0);
  }
  return data;
}

}  // namespace stanceprobe::vocabfilter
