#include "tiger/config.hpp"

#include "tiger/util.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <set>

namespace tiger {

Config Config::defaults() {
  Config c;
  c.values_ = {
      {"paths.entities", ""},
      {"paths.mentions", ""},
      {"paths.test_mentions", ""},
      {"paths.triples", ""},
      {"paths.out", "run"},
      {"experiment.years", "2019..2022"},
      {"experiment.categories", "continual,new"},
      {"experiment.mode", "forward_and_backward"},
      {"graph.k", "10"},
      {"graph.min_count", "46"},
      {"graph.max_count", "200"},
      {"graph.embedder", "hashing"},
      {"graph.embed_dim", "64"},
      {"model.dim", "64"},
      {"model.encoder", "attention"},
      {"model.encoder_layers", "2"},
      {"model.gcn_layers", "2"},
      {"model.gcn_hidden", "32"},
      {"model.gcn_out", "16"},
      {"model.graph_branch", "true"},
      {"train.learning_rate", "1e-5"},
      {"train.epochs", "1"},
      {"train.batch_size", "32"},
      {"train.max_len", "128"},
      {"train.a", "0.5"},
      {"train.b", "0.01"},
      {"train.gram_sample", "1024"},
      {"train.gram_full_max", "2048"},
      {"train.clip_norm", "1.0"},
      {"train.beta1", "0.9"},
      {"train.beta2", "0.999"},
      {"train.adam_eps", "1e-8"},
      {"train.negatives", "in_batch"},
      {"train.num_negatives", "0"},
      {"train.freeze_fusion_zero", "false"},
      {"run.seed", "0"},
      {"run.workers", "1"},
  };
  return c;
}

Config Config::parse(std::string_view text, const std::string& origin) {
  Config c;
  std::string section;
  std::size_t line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    auto where = [&] { return origin + ":" + std::to_string(line_no) + ": "; };
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where() + "unterminated section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError(where() + "empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where() + "expected 'key = value'");
    const auto key = trim(std::string_view(line).substr(0, eq));
    if (key.empty()) throw ConfigError(where() + "empty key");
    const std::string full = section.empty() ? key : section + "." + key;
    c.values_[full] = trim(std::string_view(line).substr(eq + 1));
  }
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config file not found: " + path.string());
  auto c = parse(read_file(path), path.string());
  // Relative paths in a file are taken relative to that file.
  const auto base = std::filesystem::absolute(path).parent_path();
  for (auto& [k, v] : c.values_) {
    if (k.rfind("paths.", 0) == 0 && !v.empty() && std::filesystem::path(v).is_relative()) {
      v = (base / v).lexically_normal().string();
    }
  }
  return c;
}

void Config::merge(const Config& other) {
  for (const auto& [k, v] : other.values_) set(k, v);
}

void Config::set(const std::string& key, std::string value) {
  if (!defaults().has(key)) throw ConfigError("unknown config key '" + key + "'");
  values_[key] = std::move(value);
}

const std::string& Config::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing config key '" + key + "'");
  return it->second;
}

std::int64_t Config::get_int64(const std::string& key) const {
  const auto& s = get(key);
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (s.empty() || *end != '\0' || errno != 0) throw ConfigError("config '" + key + "': not an integer: '" + s + "'");
  return v;
}

int Config::get_int(const std::string& key) const {
  const auto v = get_int64(key);
  if (v < INT32_MIN || v > INT32_MAX) throw ConfigError("config '" + key + "': out of range");
  return static_cast<int>(v);
}

std::uint64_t Config::get_u64(const std::string& key) const {
  const auto& s = get(key);
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (s.empty() || s.front() == '-' || *end != '\0' || errno != 0) {
    throw ConfigError("config '" + key + "': not an unsigned integer: '" + s + "'");
  }
  return v;
}

double Config::get_real(const std::string& key) const {
  const auto& s = get(key);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0' || errno != 0) throw ConfigError("config '" + key + "': not a number: '" + s + "'");
  return v;
}

bool Config::get_bool(const std::string& key) const {
  const auto& s = get(key);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("config '" + key + "': not a boolean: '" + s + "'");
}

std::vector<std::string> Config::get_list(const std::string& key) const {
  std::vector<std::string> out;
  for (const auto& part : split(get(key), ',')) {
    auto t = trim(part);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

std::string Config::serialize(const std::vector<std::string>& exclude) const {
  std::string out;
  std::string section = "\x01";
  for (const auto& [k, v] : values_) {
    if (std::find(exclude.begin(), exclude.end(), k) != exclude.end()) continue;
    const auto dot = k.find('.');
    const std::string sec = dot == std::string::npos ? "" : k.substr(0, dot);
    const std::string name = dot == std::string::npos ? k : k.substr(dot + 1);
    if (sec != section) {
      if (!out.empty()) out += "\n";
      if (!sec.empty()) out += "[" + sec + "]\n";
      section = sec;
    }
    out += name + " = " + v + "\n";
  }
  return out;
}

std::vector<int> parse_years(std::string_view spec) {
  const auto s = trim(spec);
  auto to_int = [&](const std::string& t) {
    char* end = nullptr;
    const long v = std::strtol(t.c_str(), &end, 10);
    if (t.empty() || *end != '\0') throw ConfigError("bad year '" + t + "' in '" + s + "'");
    return static_cast<int>(v);
  };
  std::vector<int> years;
  if (auto dots = s.find(".."); dots != std::string::npos) {
    const int a = to_int(trim(std::string_view(s).substr(0, dots)));
    const int b = to_int(trim(std::string_view(s).substr(dots + 2)));
    if (b < a) throw ConfigError("year range '" + s + "' is descending");
    for (int y = a; y <= b; ++y) years.push_back(y);
  } else {
    for (const auto& part : split(s, ',')) years.push_back(to_int(trim(part)));
    std::sort(years.begin(), years.end());
  }
  if (years.empty()) throw ConfigError("empty year list");
  if (std::set<int>(years.begin(), years.end()).size() != years.size()) throw ConfigError("duplicate year in '" + s + "'");
  return years;
}

std::string expand_year(std::string_view templ, int year) {
  std::string out(templ);
  const std::string tag = "{year}", y = std::to_string(year);
  for (auto pos = out.find(tag); pos != std::string::npos; pos = out.find(tag, pos + y.size())) {
    out.replace(pos, tag.size(), y);
  }
  return out;
}

}  // namespace tiger
