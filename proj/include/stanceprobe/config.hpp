#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace stanceprobe::config {

/// Flat key/value configuration in a TOML-like syntax:
///
///     # comment
///     seed = 7
///     languages = ["en", "es"]
///     [lvm]
///     beta_grid = [1e-3, 1, 100]
///
/// Section headers prefix the keys that follow ("lvm.beta_grid"). Values are
/// quoted strings, bare scalars (numbers, booleans) or one-level arrays.
class KeyValueConfig {
 public:
  struct Value {
    bool is_list = false;
    bool quoted = false;  // scalar was a quoted string
    std::vector<std::string> items;
  };

  static KeyValueConfig parse(std::istream& in);
  static KeyValueConfig parse_string(const std::string& text);
  static KeyValueConfig load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.contains(key); }
  const std::map<std::string, Value>& values() const { return values_; }

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<std::string> get_list(const std::string& key,
                                    const std::vector<std::string>& fallback = {}) const;
  std::vector<double> get_double_list(const std::string& key,
                                      const std::vector<double>& fallback) const;

  /// Keys under `prefix.` with the prefix stripped (first component only).
  std::vector<std::string> subkeys(const std::string& prefix) const;

  void set(const std::string& key, Value value) { values_[key] = std::move(value); }
  void set_scalar(const std::string& key, const std::string& raw, bool quoted = false);

  /// Sorted `key = value` lines; stable across formatting differences in
  /// the source, so suitable for hashing.
  std::string canonical_text() const;

  /// Directory relative paths are resolved against (the config file's).
  std::filesystem::path base_dir;

 private:
  std::map<std::string, Value> values_;
};

}  // namespace stanceprobe::config
