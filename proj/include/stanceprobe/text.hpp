#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace stanceprobe::text {

/// True for languages whose script has no case (Chinese, Arabic, Hindi and
/// their usual script tags). Folding is the identity for these.
bool is_caseless_language(std::string_view language);

/// Per-language case folding applied to treebank forms, probe tokens and
/// lexicon words alike. Latin (Basic, Latin-1, Extended-A), Greek and
/// Cyrillic upper-case letters map to lower case; everything else passes
/// through unchanged. Invalid UTF-8 bytes are copied verbatim.
std::string fold_case(std::string_view word, std::string_view language);

/// Splits on a single-character delimiter, keeping empty fields.
std::vector<std::string> split(std::string_view line, char delim);

std::string_view trim(std::string_view s);

/// Quotes a CSV field when it contains a comma, quote or newline.
std::string csv_escape(std::string_view field);

}  // namespace stanceprobe::text
