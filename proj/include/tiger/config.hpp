#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tiger {

inline constexpr std::string_view kVersion = "tiger 1.0.0";

/// Bad configuration or command-line value.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Flat `key = value` settings grouped under `[section]` headers. Keys are
/// stored as "section.key". `#` starts a comment line.
///
/// Precedence, lowest first: built-in defaults, the config file, `--set`
/// overrides, dedicated command-line flags.
class Config {
 public:
  static Config defaults();
  static Config parse(std::string_view text, const std::string& origin = "config");
  static Config load(const std::filesystem::path& path);

  /// Applies `other` on top of this; unknown keys are rejected.
  void merge(const Config& other);
  void set(const std::string& key, std::string value);
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  const std::string& get(const std::string& key) const;
  int get_int(const std::string& key) const;
  std::int64_t get_int64(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  double get_real(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<std::string> get_list(const std::string& key) const;

  /// Sectioned text with keys sorted; `exclude` drops keys from the output.
  std::string serialize(const std::vector<std::string>& exclude = {}) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// "2019..2022" or "2019,2021".
std::vector<int> parse_years(std::string_view spec);

/// Replaces every "{year}" in the template.
std::string expand_year(std::string_view templ, int year);

}  // namespace tiger
