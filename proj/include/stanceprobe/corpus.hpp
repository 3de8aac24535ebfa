#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "stanceprobe/types.hpp"

namespace stanceprobe::corpus {

/// Maps one of the twelve knowledge-base gender identities onto the
/// three analysis classes. Returns nullopt for excluded labels: the two
/// "organism" labels, empty input and anything unrecognised (the latter
/// logs a warning).
std::optional<GenderClass> normalize_gender(std::string_view raw_label);

struct PoliticianRecord {
  std::string entity_id;
  GenderClass gender = GenderClass::OTHER;
  std::map<std::string, std::string> names;  // language code -> surface name

  bool has_name(const std::string& language) const { return names.contains(language); }
};

struct RecordIssue {
  std::size_t line = 0;
  std::string message;
};

struct PoliticianParse {
  std::vector<PoliticianRecord> records;
  std::size_t input_count = 0;     // non-blank lines seen
  std::size_t excluded_count = 0;  // dropped for any reason, malformed included
  std::vector<RecordIssue> issues;

  std::map<GenderClass, std::size_t> gender_counts() const;
};

/// Reads politician JSON Lines
/// `{"entity_id": str, "gender_raw": str, "names": {lang: str}}`.
/// Bad records are reported in `issues` and skipped; parsing continues.
PoliticianParse parse_politicians(std::istream& in);

/// Writes retained records back as JSON Lines with `gender_raw` set to the
/// normalized class name.
void write_politicians(const std::vector<PoliticianRecord>& records, std::ostream& out);

struct ProbeEntry {
  std::string token;
  double prob = 0.0;

  friend bool operator==(const ProbeEntry&, const ProbeEntry&) = default;
};

struct ProbeTable {
  std::string model_id;
  std::string language;
  std::string entity_id;
  GenderClass gender = GenderClass::OTHER;
  Slot slot = Slot::PREFIX;
  std::vector<ProbeEntry> entries;  // prob descending, ties by token

  friend bool operator==(const ProbeTable&, const ProbeTable&) = default;
};

struct ProbeKey {
  std::string model_id;
  std::string entity_id;
  Slot slot = Slot::PREFIX;
  std::string language;

  auto operator<=>(const ProbeKey&) const = default;
  std::string describe() const;
};

ProbeKey key_of(const ProbeTable& table);

/// Immutable collection of probe tables, unique per (model, entity, slot,
/// language), indexed by (entity, model).
class ProbeSet {
 public:
  ProbeSet() = default;

  /// Validates and takes ownership. Entries are re-sorted; throws Error on
  /// duplicate keys or probabilities outside [0, 1].
  static ProbeSet from_tables(std::vector<ProbeTable> tables);

  const std::vector<ProbeTable>& tables() const { return tables_; }
  std::size_t size() const { return tables_.size(); }
  bool empty() const { return tables_.empty(); }

  /// All tables for one (entity, model), any slot or language.
  std::vector<const ProbeTable*> find(const std::string& entity_id,
                                      const std::string& model_id) const;

  std::vector<std::string> models() const;
  std::vector<std::string> languages() const;

 private:
  std::vector<ProbeTable> tables_;
  std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> index_;
};

/// Parses one probe JSON line. Throws ParseError tagged with `line_no`.
ProbeTable parse_probe_line(std::string_view line, std::size_t line_no);

/// Canonical single-line serialization: fixed key order, compact
/// separators, shortest round-trip decimal for every probability.
std::string format_probe_line(const ProbeTable& table);

ProbeSet read_probe_set(std::istream& in);
ProbeSet read_probe_set(const std::filesystem::path& path);
void write_probe_set(const ProbeSet& set, std::ostream& out);

}  // namespace stanceprobe::corpus
