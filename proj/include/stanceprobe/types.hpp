#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace stanceprobe {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input that could not be parsed; carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

enum class GenderClass { MALE, FEMALE, OTHER };
inline constexpr std::array<GenderClass, 3> kAllGenders = {GenderClass::MALE, GenderClass::FEMALE,
                                                           GenderClass::OTHER};

enum class SentimentClass { POS, NEG, NEU };
inline constexpr std::array<SentimentClass, 3> kAllSentiments = {
    SentimentClass::POS, SentimentClass::NEG, SentimentClass::NEU};

enum class PosClass { ADJ, VERB, OTHER };

enum class Slot { PREFIX, SUFFIX };

constexpr std::size_t index(GenderClass g) { return static_cast<std::size_t>(g); }
constexpr std::size_t index(SentimentClass s) { return static_cast<std::size_t>(s); }

/// Lower-case wire name: "male", "female", "other".
std::string_view to_string(GenderClass g);
/// Upper-case name: "POS", "NEG", "NEU".
std::string_view to_string(SentimentClass s);
/// "ADJ", "VERB", "OTHER".
std::string_view to_string(PosClass p);
/// "prefix", "suffix".
std::string_view to_string(Slot s);

/// Accepts the wire names as well as MALE/MASC/M and FEMALE/FEM/F (case-insensitive).
std::optional<GenderClass> parse_gender(std::string_view text);
std::optional<SentimentClass> parse_sentiment(std::string_view text);
std::optional<PosClass> parse_pos_class(std::string_view text);
std::optional<Slot> parse_slot(std::string_view text);

/// Short column label used in ranking tables: MASC / FEM / OTHER.
std::string_view table_label(GenderClass g);

/// Shortest decimal representation that round-trips to the same double.
std::string format_double(double value);

}  // namespace stanceprobe
