#include "stanceprobe/config.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include "stanceprobe/text.hpp"
#include "stanceprobe/types.hpp"

namespace stanceprobe::config {

namespace {

std::string unquote(std::string_view s, std::size_t line_no) {
  if (s.size() < 2 || s.back() != '"') throw ParseError("unterminated string", line_no);
  std::string out;
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    if (s[i] == '\\' && i + 2 < s.size()) {
      const char c = s[++i];
      out.push_back(c == 'n' ? '\n' : (c == 't' ? '\t' : c));
    } else {
      out.push_back(s[i]);
    }
  }
  return out;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out.push_back(c);
  }
  return out + "\"";
}

// Strips a trailing comment that is not inside a quoted string.
std::string_view strip_comment(std::string_view line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

// Splits array contents on commas outside quotes.
std::vector<std::string_view> split_items(std::string_view body) {
  std::vector<std::string_view> items;
  bool in_string = false;
  std::size_t start = 0;
  for (std::size_t i = 0; i < body.size(); ++i) {
    if (body[i] == '"' && (i == 0 || body[i - 1] != '\\')) in_string = !in_string;
    if (body[i] == ',' && !in_string) {
      items.push_back(text::trim(body.substr(start, i - start)));
      start = i + 1;
    }
  }
  auto last = text::trim(body.substr(start));
  if (!last.empty()) items.push_back(last);
  return items;
}

std::optional<double> to_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (errno != 0 || end != s.c_str() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::istream& in) {
  KeyValueConfig cfg;
  std::string section;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = text::trim(strip_comment(line));
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']') throw ParseError("malformed section header", line_no);
      section = std::string(text::trim(body.substr(1, body.size() - 2)));
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected key = value", line_no);
    auto key = std::string(text::trim(body.substr(0, eq)));
    if (key.size() >= 2 && key.front() == '"') key = unquote(key, line_no);
    if (key.empty()) throw ParseError("empty key", line_no);
    const auto raw = text::trim(body.substr(eq + 1));
    Value value;
    if (!raw.empty() && raw.front() == '[') {
      if (raw.back() != ']') throw ParseError("unterminated array", line_no);
      value.is_list = true;
      for (auto item : split_items(raw.substr(1, raw.size() - 2)))
        value.items.push_back(!item.empty() && item.front() == '"' ? unquote(item, line_no)
                                                                   : std::string(item));
    } else if (!raw.empty() && raw.front() == '"') {
      value.quoted = true;
      value.items.push_back(unquote(raw, line_no));
    } else {
      if (raw.empty()) throw ParseError("missing value for '" + key + "'", line_no);
      value.items.emplace_back(raw);
    }
    cfg.values_[section.empty() ? key : section + "." + key] = std::move(value);
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::parse_string(const std::string& text) {
  std::istringstream in(text);
  return parse(in);
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path.string());
  auto cfg = parse(in);
  cfg.base_dir = path.parent_path();
  return cfg;
}

std::string KeyValueConfig::get_string(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw Error("missing config key '" + key + "'");
  if (it->second.is_list) throw Error("config key '" + key + "' is a list");
  return it->second.items.front();
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
  return has(key) ? get_string(key) : fallback;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  if (!has(key)) return fallback;
  const auto s = get_string(key);
  auto v = to_double(s);
  if (!v) throw Error("config key '" + key + "' is not a number: " + s);
  return *v;
}

long long KeyValueConfig::get_int(const std::string& key, long long fallback) const {
  if (!has(key)) return fallback;
  const auto s = get_string(key);
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (errno != 0 || s.empty() || end != s.c_str() + s.size())
    throw Error("config key '" + key + "' is not an integer: " + s);
  return v;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const auto s = get_string(key);
  if (s == "true") return true;
  if (s == "false") return false;
  throw Error("config key '" + key + "' is not a boolean: " + s);
}

std::vector<std::string> KeyValueConfig::get_list(const std::string& key,
                                                  const std::vector<std::string>& fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  return it->second.items;
}

std::vector<double> KeyValueConfig::get_double_list(const std::string& key,
                                                    const std::vector<double>& fallback) const {
  if (!has(key)) return fallback;
  std::vector<double> out;
  for (const auto& s : get_list(key)) {
    auto v = to_double(s);
    if (!v) throw Error("config key '" + key + "' has a non-numeric item: " + s);
    out.push_back(*v);
  }
  return out;
}

std::vector<std::string> KeyValueConfig::subkeys(const std::string& prefix) const {
  std::set<std::string> out;
  const auto p = prefix + ".";
  for (const auto& [key, v] : values_) {
    if (key.rfind(p, 0) != 0) continue;
    const auto rest = key.substr(p.size());
    out.insert(rest.substr(0, rest.find('.')));
  }
  return {out.begin(), out.end()};
}

void KeyValueConfig::set_scalar(const std::string& key, const std::string& raw, bool quoted) {
  values_[key] = Value{false, quoted, {raw}};
}

std::string KeyValueConfig::canonical_text() const {
  std::string out;
  for (const auto& [key, v] : values_) {
    out += key + " = ";
    if (v.is_list) {
      out += "[";
      for (std::size_t i = 0; i < v.items.size(); ++i) out += (i ? ", " : "") + quote(v.items[i]);
      out += "]";
    } else {
      out += v.quoted ? quote(v.items.front()) : v.items.front();
    }
    out += "\n";
  }
  return out;
}

}  // namespace stanceprobe::config
