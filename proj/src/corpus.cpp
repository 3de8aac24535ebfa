#include "stanceprobe/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "stanceprobe/text.hpp"

namespace stanceprobe::corpus {

using nlohmann::json;
using nlohmann::ordered_json;

std::optional<GenderClass> normalize_gender(std::string_view raw_label) {
  std::string label(text::trim(raw_label));
  std::transform(label.begin(), label.end(), label.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (label.empty()) return std::nullopt;
  if (label == "male") return GenderClass::MALE;
  if (label == "female" || label == "cisgender female") return GenderClass::FEMALE;
  if (label == "male organism" || label == "female organism") return std::nullopt;
  static const std::set<std::string, std::less<>> kOther = {
      "non-binary",   "genderfluid",        "genderqueer",      "third gender",
      "transfeminine", "transgender female", "transgender male"};
  // "other" is what write_politicians emits for this class.
  if (kOther.contains(label) || label == "other") return GenderClass::OTHER;
  spdlog::warn("unrecognised gender label '{}' excluded", label);
  return std::nullopt;
}

std::map<GenderClass, std::size_t> PoliticianParse::gender_counts() const {
  std::map<GenderClass, std::size_t> counts;
  for (auto g : kAllGenders) counts[g] = 0;
  for (const auto& r : records) ++counts[r.gender];
  return counts;
}

PoliticianParse parse_politicians(std::istream& in) {
  PoliticianParse result;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  auto reject = [&](std::string msg) {
    ++result.excluded_count;
    spdlog::warn("politician record at line {}: {}", line_no, msg);
    result.issues.push_back({line_no, std::move(msg)});
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    ++result.input_count;

    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      reject(std::string("malformed JSON: ") + e.what());
      continue;
    }
    if (!j.is_object() || !j.contains("entity_id") || !j["entity_id"].is_string()) {
      reject("missing entity_id");
      continue;
    }
    PoliticianRecord rec;
    rec.entity_id = j["entity_id"].get<std::string>();
    if (!j.contains("gender_raw") || !j["gender_raw"].is_string()) {
      reject("missing gender for " + rec.entity_id);
      continue;
    }
    const auto gender = normalize_gender(j["gender_raw"].get<std::string>());
    if (!gender) {
      ++result.excluded_count;
      continue;
    }
    rec.gender = *gender;
    if (j.contains("names") && j["names"].is_object()) {
      for (const auto& [lang, name] : j["names"].items()) {
        if (name.is_string() && !name.get<std::string>().empty())
          rec.names.emplace(lang, name.get<std::string>());
      }
    }
    if (rec.names.empty()) {
      reject("no names for " + rec.entity_id);
      continue;
    }
    if (!seen.insert(rec.entity_id).second) {
      reject("duplicate entity_id " + rec.entity_id);
      continue;
    }
    result.records.push_back(std::move(rec));
  }
  return result;
}

void write_politicians(const std::vector<PoliticianRecord>& records, std::ostream& out) {
  for (const auto& r : records) {
    ordered_json j;
    j["entity_id"] = r.entity_id;
    j["gender_raw"] = to_string(r.gender);
    j["names"] = ordered_json::object();
    for (const auto& [lang, name] : r.names) j["names"][lang] = name;
    out << j.dump() << '\n';
  }
}

std::string ProbeKey::describe() const {
  return "(model=" + model_id + ", entity=" + entity_id + ", slot=" + std::string(to_string(slot)) +
         ", language=" + language + ")";
}

ProbeKey key_of(const ProbeTable& table) {
  return {table.model_id, table.entity_id, table.slot, table.language};
}

namespace {

void sort_entries(std::vector<ProbeEntry>& entries) {
  std::stable_sort(entries.begin(), entries.end(), [](const ProbeEntry& a, const ProbeEntry& b) {
    if (a.prob != b.prob) return a.prob > b.prob;
    return a.token < b.token;
  });
}

void check_prob(double p, std::size_t line_no, const std::string& token) {
  if (!std::isfinite(p) || p < 0.0 || p > 1.0)
    throw ParseError("invalid probability " + format_double(p) + " for token '" + token + "'",
                     line_no);
}

}  // namespace

ProbeSet ProbeSet::from_tables(std::vector<ProbeTable> tables) {
  ProbeSet set;
  std::set<ProbeKey> keys;
  for (auto& t : tables) {
    for (const auto& e : t.entries) check_prob(e.prob, 0, e.token);
    auto key = key_of(t);
    if (!keys.insert(key).second) throw Error("duplicate probe table key " + key.describe());
    sort_entries(t.entries);
  }
  set.tables_ = std::move(tables);
  for (std::size_t i = 0; i < set.tables_.size(); ++i) {
    const auto& t = set.tables_[i];
    set.index_[{t.entity_id, t.model_id}].push_back(i);
  }
  return set;
}

std::vector<const ProbeTable*> ProbeSet::find(const std::string& entity_id,
                                              const std::string& model_id) const {
  std::vector<const ProbeTable*> out;
  if (auto it = index_.find({entity_id, model_id}); it != index_.end())
    for (auto i : it->second) out.push_back(&tables_[i]);
  return out;
}

std::vector<std::string> ProbeSet::models() const {
  std::set<std::string> s;
  for (const auto& t : tables_) s.insert(t.model_id);
  return {s.begin(), s.end()};
}

std::vector<std::string> ProbeSet::languages() const {
  std::set<std::string> s;
  for (const auto& t : tables_) s.insert(t.language);
  return {s.begin(), s.end()};
}

ProbeTable parse_probe_line(std::string_view line, std::size_t line_no) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what(), line_no);
  }
  auto str_field = [&](const char* name) -> std::string {
    if (!j.contains(name) || !j[name].is_string())
      throw ParseError(std::string("missing string field '") + name + "'", line_no);
    return j[name].get<std::string>();
  };
  ProbeTable t;
  t.model_id = str_field("model_id");
  t.language = str_field("language");
  t.entity_id = str_field("entity_id");
  const auto gender = str_field("gender");
  if (gender == "male") t.gender = GenderClass::MALE;
  else if (gender == "female") t.gender = GenderClass::FEMALE;
  else if (gender == "other") t.gender = GenderClass::OTHER;
  else throw ParseError("invalid gender '" + gender + "'", line_no);
  const auto slot = str_field("slot");
  if (slot == "prefix") t.slot = Slot::PREFIX;
  else if (slot == "suffix") t.slot = Slot::SUFFIX;
  else throw ParseError("invalid slot '" + slot + "'", line_no);

  if (!j.contains("entries") || !j["entries"].is_array())
    throw ParseError("missing entries array", line_no);
  for (const auto& e : j["entries"]) {
    if (!e.is_object() || !e.contains("token") || !e["token"].is_string() || !e.contains("prob") ||
        !e["prob"].is_number())
      throw ParseError("malformed entry", line_no);
    ProbeEntry entry{e["token"].get<std::string>(), e["prob"].get<double>()};
    check_prob(entry.prob, line_no, entry.token);
    t.entries.push_back(std::move(entry));
  }
  return t;
}

std::string format_probe_line(const ProbeTable& t) {
  ordered_json j;
  j["model_id"] = t.model_id;
  j["language"] = t.language;
  j["entity_id"] = t.entity_id;
  j["gender"] = to_string(t.gender);
  j["slot"] = to_string(t.slot);
  j["entries"] = ordered_json::array();
  for (const auto& e : t.entries) {
    ordered_json entry;
    entry["token"] = e.token;
    entry["prob"] = e.prob;
    j["entries"].push_back(std::move(entry));
  }
  return j.dump();
}

ProbeSet read_probe_set(std::istream& in) {
  std::vector<ProbeTable> tables;
  std::map<ProbeKey, std::size_t> first_line;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    auto table = parse_probe_line(line, line_no);
    auto [it, inserted] = first_line.emplace(key_of(table), line_no);
    if (!inserted)
      throw ParseError("duplicate probe table key " + it->first.describe() +
                           " (first seen at line " + std::to_string(it->second) + ")",
                       line_no);
    tables.push_back(std::move(table));
  }
  return ProbeSet::from_tables(std::move(tables));
}

ProbeSet read_probe_set(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open probe file " + path.string());
  return read_probe_set(in);
}

void write_probe_set(const ProbeSet& set, std::ostream& out) {
  for (const auto& t : set.tables()) out << format_probe_line(t) << '\n';
}

}  // namespace stanceprobe::corpus
