#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "stanceprobe/lvm.hpp"
#include "stanceprobe/types.hpp"

namespace stanceprobe::report {

inline constexpr std::string_view kSoftwareVersion = "0.3.0";

/// CSV with a rank column, then a lemma and a tau column per ranking
/// ("FEM-POS", "tau_FEM-POS"), `k` rows. Shorter rankings leave cells empty.
/// An empty ranking list yields the header line only.
std::string emit_rank_table(const std::vector<lvm::DeviationRanking>& rankings, std::size_t k);

struct SentimentPoint {
  std::string language;
  std::string model;
  GenderClass gender = GenderClass::MALE;
  double frequency = 0.0;
  bool significant = false;
};

/// SVG with one panel per language (first-appearance order) and one marker
/// per (model, gender). Significant points use an "x" glyph
/// (`class="sig-x"`), others a circle. Output is a pure function of input.
std::string render_sentiment_svg(const std::vector<SentimentPoint>& points, const std::string& title);

/// Renders and writes atomically. Throws on an empty point list.
void emit_sentiment_plot(const std::vector<SentimentPoint>& points, const std::filesystem::path& path,
                         const std::string& title = "");

/// Writes via a sibling temp file and rename.
void write_atomically(const std::filesystem::path& path, std::string_view content);

std::string sha256_hex(std::string_view bytes);
std::string file_sha256(const std::filesystem::path& path);

struct RunManifest {
  std::string software_version{kSoftwareVersion};
  std::string config_hash;
  std::string config_text;  // canonical key/value text the run used
  std::map<std::string, std::string> input_digests;  // path -> sha256
  std::uint64_t seed = 0;
  std::vector<double> alpha_grid;
  std::vector<double> beta_grid;
  std::string started_at;
  std::string finished_at;
};

/// Pretty-printed JSON with every field present.
std::string write_manifest(const RunManifest& manifest);
RunManifest read_manifest(std::string_view json_text);

/// UTC ISO-8601 timestamp of now.
std::string utc_timestamp();

}  // namespace stanceprobe::report
