#include "stanceprobe/report.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iterator>
#include <sstream>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "stanceprobe/text.hpp"

namespace stanceprobe::report {

std::string emit_rank_table(const std::vector<lvm::DeviationRanking>& rankings, std::size_t k) {
  std::ostringstream out;
  out << "rank";
  for (const auto& r : rankings) {
    const std::string label =
        std::string(table_label(r.gender)) + "-" + std::string(to_string(r.sentiment));
    out << ',' << label << ",tau_" << label;
  }
  out << '\n';
  if (rankings.empty()) return out.str();
  for (std::size_t row = 0; row < k; ++row) {
    out << row + 1;
    for (const auto& r : rankings) {
      if (row < r.items.size())
        out << ',' << text::csv_escape(r.items[row].lemma) << ',' << format_double(r.items[row].tau);
      else
        out << ",,";
    }
    out << '\n';
  }
  return out.str();
}

namespace {

std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

constexpr double kPanelW = 280.0;
constexpr double kPanelH = 220.0;
constexpr double kMarginL = 44.0;
constexpr double kMarginR = 12.0;
constexpr double kMarginT = 28.0;
constexpr double kMarginB = 56.0;
constexpr std::size_t kColumns = 4;

std::string_view gender_color(GenderClass g) {
  switch (g) {
    case GenderClass::MALE: return "#1f77b4";
    case GenderClass::FEMALE: return "#d62728";
    case GenderClass::OTHER: return "#7f7f7f";
  }
  return "#000000";
}

template <typename T>
std::size_t position_of(std::vector<T>& seen, const T& value) {
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (seen[i] == value) return i;
  seen.push_back(value);
  return seen.size() - 1;
}

}  // namespace

std::string render_sentiment_svg(const std::vector<SentimentPoint>& points, const std::string& title) {
  if (points.empty()) throw Error("no points to plot");
  std::vector<std::string> languages;
  for (const auto& p : points) position_of(languages, p.language);
  const std::size_t cols = std::min(kColumns, languages.size());
  const std::size_t rows = (languages.size() + kColumns - 1) / kColumns;
  const double header = 30.0;
  const double width = static_cast<double>(cols) * kPanelW;
  const double height = header + static_cast<double>(rows) * kPanelH + 24.0;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt2(width) << "\" height=\""
      << fmt2(height) << "\" viewBox=\"0 0 " << fmt2(width) << ' ' << fmt2(height)
      << "\" font-family=\"sans-serif\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  svg << "<text x=\"" << fmt2(width / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
      << xml_escape(title) << "</text>\n";

  for (std::size_t li = 0; li < languages.size(); ++li) {
    const double ox = static_cast<double>(li % kColumns) * kPanelW;
    const double oy = header + static_cast<double>(li / kColumns) * kPanelH;
    const double plot_w = kPanelW - kMarginL - kMarginR;
    const double plot_h = kPanelH - kMarginT - kMarginB;
    const double x0 = ox + kMarginL, y0 = oy + kMarginT;

    std::vector<std::string> models;
    for (const auto& p : points)
      if (p.language == languages[li]) position_of(models, p.model);

    svg << "<g class=\"panel\" data-language=\"" << xml_escape(languages[li]) << "\">\n";
    svg << "<text x=\"" << fmt2(x0 + plot_w / 2) << "\" y=\"" << fmt2(oy + 18)
        << "\" text-anchor=\"middle\" font-size=\"12\">" << xml_escape(languages[li]) << "</text>\n";
    svg << "<rect x=\"" << fmt2(x0) << "\" y=\"" << fmt2(y0) << "\" width=\"" << fmt2(plot_w)
        << "\" height=\"" << fmt2(plot_h) << "\" fill=\"none\" stroke=\"#444444\"/>\n";
    for (int tick = 0; tick <= 4; ++tick) {
      const double v = tick * 0.25;
      const double ty = y0 + plot_h * (1.0 - v);
      svg << "<line x1=\"" << fmt2(x0 - 3) << "\" y1=\"" << fmt2(ty) << "\" x2=\"" << fmt2(x0)
          << "\" y2=\"" << fmt2(ty) << "\" stroke=\"#444444\"/>";
      svg << "<text x=\"" << fmt2(x0 - 5) << "\" y=\"" << fmt2(ty + 3)
          << "\" text-anchor=\"end\" font-size=\"9\">" << fmt2(v) << "</text>\n";
    }
    const double slot_w = plot_w / static_cast<double>(models.size());
    for (std::size_t mi = 0; mi < models.size(); ++mi) {
      const double cx = x0 + slot_w * (static_cast<double>(mi) + 0.5);
      svg << "<text x=\"" << fmt2(cx) << "\" y=\"" << fmt2(y0 + plot_h + 12)
          << "\" text-anchor=\"end\" font-size=\"9\" transform=\"rotate(-35 " << fmt2(cx) << ' '
          << fmt2(y0 + plot_h + 12) << ")\">" << xml_escape(models[mi]) << "</text>\n";
    }
    for (const auto& p : points) {
      if (p.language != languages[li]) continue;
      const auto mi = position_of(models, p.model);
      const double offset = p.gender == GenderClass::MALE ? -6.0 : (p.gender == GenderClass::FEMALE ? 6.0 : 0.0);
      const double cx = x0 + slot_w * (static_cast<double>(mi) + 0.5) + offset;
      const double cy = y0 + plot_h * (1.0 - std::clamp(p.frequency, 0.0, 1.0));
      const auto color = gender_color(p.gender);
      if (p.significant) {
        svg << "<path class=\"sig-x\" d=\"M" << fmt2(cx - 4) << ' ' << fmt2(cy - 4) << " L"
            << fmt2(cx + 4) << ' ' << fmt2(cy + 4) << " M" << fmt2(cx - 4) << ' ' << fmt2(cy + 4)
            << " L" << fmt2(cx + 4) << ' ' << fmt2(cy - 4) << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n";
      } else {
        svg << "<circle class=\"point\" cx=\"" << fmt2(cx) << "\" cy=\"" << fmt2(cy)
            << "\" r=\"3.5\" fill=\"" << color << "\"/>\n";
      }
    }
    svg << "</g>\n";
  }
  const double ly = height - 8.0;
  svg << "<text x=\"8\" y=\"" << fmt2(ly)
      << "\" font-size=\"10\"><tspan fill=\"#1f77b4\">masculine</tspan>  <tspan fill=\"#d62728\">"
         "feminine</tspan>  x marks a significant gender difference</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

void emit_sentiment_plot(const std::vector<SentimentPoint>& points, const std::filesystem::path& path,
                         const std::string& title) {
  write_atomically(path, render_sentiment_svg(points, title));
}

void write_atomically(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 computation failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex.push_back(kHex[digest[i] >> 4]);
    hex.push_back(kHex[digest[i] & 0xF]);
  }
  return hex;
}

std::string file_sha256(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return sha256_hex(bytes);
}

std::string write_manifest(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["software_version"] = m.software_version;
  j["config_hash"] = m.config_hash;
  j["config"] = m.config_text;
  j["inputs"] = nlohmann::ordered_json::object();
  for (const auto& [path, digest] : m.input_digests) j["inputs"][path] = digest;
  j["seed"] = m.seed;
  j["alpha_grid"] = m.alpha_grid;
  j["beta_grid"] = m.beta_grid;
  j["started_at"] = m.started_at;
  j["finished_at"] = m.finished_at;
  return j.dump(2) + "\n";
}

RunManifest read_manifest(std::string_view json_text) {
  try {
    const auto j = nlohmann::json::parse(json_text);
    RunManifest m;
    m.software_version = j.at("software_version").get<std::string>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.config_text = j.at("config").get<std::string>();
    for (const auto& [path, digest] : j.at("inputs").items())
      m.input_digests[path] = digest.get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.alpha_grid = j.at("alpha_grid").get<std::vector<double>>();
    m.beta_grid = j.at("beta_grid").get<std::vector<double>>();
    m.started_at = j.at("started_at").get<std::string>();
    m.finished_at = j.at("finished_at").get<std::string>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed manifest: ") + e.what(), 0);
  }
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace stanceprobe::report
