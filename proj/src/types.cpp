#include "stanceprobe/types.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>

namespace stanceprobe {

namespace {

std::string upper(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

}  // namespace

std::string_view to_string(GenderClass g) {
  switch (g) {
    case GenderClass::MALE: return "male";
    case GenderClass::FEMALE: return "female";
    case GenderClass::OTHER: return "other";
  }
  return "other";
}

std::string_view to_string(SentimentClass s) {
  switch (s) {
    case SentimentClass::POS: return "POS";
    case SentimentClass::NEG: return "NEG";
    case SentimentClass::NEU: return "NEU";
  }
  return "NEU";
}

std::string_view to_string(PosClass p) {
  switch (p) {
    case PosClass::ADJ: return "ADJ";
    case PosClass::VERB: return "VERB";
    case PosClass::OTHER: return "OTHER";
  }
  return "OTHER";
}

std::string_view to_string(Slot s) { return s == Slot::PREFIX ? "prefix" : "suffix"; }

std::string_view table_label(GenderClass g) {
  switch (g) {
    case GenderClass::MALE: return "MASC";
    case GenderClass::FEMALE: return "FEM";
    case GenderClass::OTHER: return "OTHER";
  }
  return "OTHER";
}

std::optional<GenderClass> parse_gender(std::string_view text) {
  const auto u = upper(text);
  if (u == "MALE" || u == "MASC" || u == "M") return GenderClass::MALE;
  if (u == "FEMALE" || u == "FEM" || u == "F") return GenderClass::FEMALE;
  if (u == "OTHER" || u == "O") return GenderClass::OTHER;
  return std::nullopt;
}

std::optional<SentimentClass> parse_sentiment(std::string_view text) {
  const auto u = upper(text);
  if (u == "POS" || u == "POSITIVE") return SentimentClass::POS;
  if (u == "NEG" || u == "NEGATIVE") return SentimentClass::NEG;
  if (u == "NEU" || u == "NEUTRAL") return SentimentClass::NEU;
  return std::nullopt;
}

std::optional<PosClass> parse_pos_class(std::string_view text) {
  const auto u = upper(text);
  if (u == "ADJ") return PosClass::ADJ;
  if (u == "VERB") return PosClass::VERB;
  if (u == "OTHER") return PosClass::OTHER;
  return std::nullopt;
}

std::optional<Slot> parse_slot(std::string_view text) {
  const auto u = upper(text);
  if (u == "PREFIX") return Slot::PREFIX;
  if (u == "SUFFIX") return Slot::SUFFIX;
  return std::nullopt;
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, end);
}

}  // namespace stanceprobe
