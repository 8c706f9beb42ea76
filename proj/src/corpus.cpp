#include "tiger/corpus.hpp"

#include "tiger/util.hpp"

#include <json.hpp>

#include <fstream>
#include <unordered_set>

namespace tiger {

std::string_view to_string(Category c) { return c == Category::continual ? "continual" : "new"; }

std::optional<Category> parse_category(std::string_view s) {
  if (s == "continual") return Category::continual;
  if (s == "new") return Category::new_entity;
  return std::nullopt;
}

EntityIndex::EntityIndex(std::vector<std::string> qids) : qids_(std::move(qids)) {
  rows_.reserve(qids_.size());
  for (std::size_t i = 0; i < qids_.size(); ++i) {
    if (qids_[i].empty()) throw DataError("entity index: empty qid at row " + std::to_string(i));
    if (!rows_.emplace(qids_[i], static_cast<std::int64_t>(i)).second) {
      throw DataError("entity index: duplicate qid " + qids_[i]);
    }
  }
}

std::optional<std::int64_t> EntityIndex::row(std::string_view qid) const {
  auto it = rows_.find(std::string(qid));
  if (it == rows_.end()) return std::nullopt;
  return it->second;
}

std::string EntityIndex::serialize() const {
  std::string out;
  for (const auto& q : qids_) {
    out += q;
    out += '\n';
  }
  return out;
}

EntityIndex EntityIndex::parse(std::string_view text) {
  std::vector<std::string> qids;
  if (!text.empty()) {
    auto lines = split(text, '\n');
    if (lines.back().empty()) lines.pop_back();
    qids = std::move(lines);
  }
  return EntityIndex(std::move(qids));
}

void EntityIndex::save(const std::filesystem::path& path) const { write_file_atomic(path, serialize()); }

EntityIndex EntityIndex::load(const std::filesystem::path& path) { return parse(read_file(path)); }

std::string escape_field(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out;
}

std::string unescape_field(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\' || i + 1 == s.size()) {
      out += s[i];
      continue;
    }
    switch (s[++i]) {
      case '\\': out += '\\'; break;
      case 't': out += '\t'; break;
      case 'n': out += '\n'; break;
      case 'r': out += '\r'; break;
      default:
        out += '\\';
        out += s[i];
    }
  }
  return out;
}

namespace {

/// Splits text into lines; a trailing newline does not yield an empty record.
std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = end + 1;
  }
  return lines;
}

std::vector<std::string> fields_of(std::string_view line, std::size_t expected, std::size_t lineno,
                                   const char* what) {
  auto fields = split(line, '\t');
  if (fields.size() != expected) {
    throw DataError(std::string(what) + " line " + std::to_string(lineno) + ": expected " +
                    std::to_string(expected) + " tab-separated fields, got " + std::to_string(fields.size()));
  }
  for (auto& f : fields) f = unescape_field(f);
  return fields;
}

std::string with_context(const std::filesystem::path& path, const DataError& e) {
  return path.string() + ": " + e.what();
}

}  // namespace

std::vector<EntityRecord> parse_entities(std::string_view text, int year) {
  std::vector<EntityRecord> out;
  std::unordered_set<std::string> seen;
  auto lines = lines_of(text);
  for (std::size_t k = 0; k < lines.size(); ++k) {
    auto f = fields_of(lines[k], 3, k + 1, "entities");
    if (f[0].empty()) throw DataError("entities line " + std::to_string(k + 1) + ": empty qid");
    if (!seen.insert(f[0]).second) {
      throw DataError("entities line " + std::to_string(k + 1) + ": duplicate qid " + f[0]);
    }
    out.push_back({std::move(f[0]), std::move(f[1]), std::move(f[2]), year});
  }
  return out;
}

std::vector<MentionRecord> parse_mentions(std::string_view text, int year) {
  std::vector<MentionRecord> out;
  auto lines = lines_of(text);
  for (std::size_t k = 0; k < lines.size(); ++k) {
    auto f = fields_of(lines[k], 5, k + 1, "mentions");
    auto cat = parse_category(f[1]);
    if (!cat) {
      throw DataError("mentions line " + std::to_string(k + 1) + ": unknown category '" + f[1] +
                      "' (expected continual or new)");
    }
    if (f[0].empty()) throw DataError("mentions line " + std::to_string(k + 1) + ": empty gold qid");
    if (f[3].empty()) throw DataError("mentions line " + std::to_string(k + 1) + ": empty mention");
    out.push_back({std::move(f[2]), std::move(f[3]), std::move(f[4]), std::move(f[0]), *cat, year});
  }
  return out;
}

std::vector<RelationTriple> parse_triples(std::string_view text) {
  std::vector<RelationTriple> out;
  auto lines = lines_of(text);
  for (std::size_t k = 0; k < lines.size(); ++k) {
    auto f = fields_of(lines[k], 3, k + 1, "triples");
    for (const auto& x : f) {
      if (x.empty()) throw DataError("triples line " + std::to_string(k + 1) + ": empty field");
    }
    out.push_back({std::move(f[0]), std::move(f[1]), std::move(f[2])});
  }
  return out;
}

std::string serialize_entities(const std::vector<EntityRecord>& entities) {
  std::string out;
  for (const auto& e : entities) {
    out += escape_field(e.qid) + '\t' + escape_field(e.title) + '\t' + escape_field(e.description) + '\n';
  }
  return out;
}

std::string serialize_mentions(const std::vector<MentionRecord>& mentions) {
  std::string out;
  for (const auto& m : mentions) {
    out += escape_field(m.gold_qid) + '\t' + std::string(to_string(m.category)) + '\t' +
           escape_field(m.context_left) + '\t' + escape_field(m.mention) + '\t' + escape_field(m.context_right) +
           '\n';
  }
  return out;
}

std::string serialize_triples(const std::vector<RelationTriple>& triples) {
  std::string out;
  for (const auto& t : triples) {
    out += escape_field(t.head_qid) + '\t' + escape_field(t.relation_id) + '\t' + escape_field(t.tail_qid) + '\n';
  }
  return out;
}

std::vector<EntityRecord> load_entities(const std::filesystem::path& path, int year) {
  try {
    return parse_entities(read_file(path), year);
  } catch (const DataError& e) {
    throw DataError(with_context(path, e));
  }
}

std::vector<MentionRecord> load_mentions(const std::filesystem::path& path, int year) {
  try {
    return parse_mentions(read_file(path), year);
  } catch (const DataError& e) {
    throw DataError(with_context(path, e));
  }
}

std::vector<RelationTriple> load_triples(const std::filesystem::path& path) {
  try {
    return parse_triples(read_file(path));
  } catch (const DataError& e) {
    throw DataError(with_context(path, e));
  }
}

CategorySplit split_by_category(const std::vector<MentionRecord>& mentions) {
  CategorySplit out;
  for (const auto& m : mentions) {
    (m.category == Category::continual ? out.continual : out.new_entities).push_back(m);
  }
  return out;
}

EntityIndex build_entity_index(const std::vector<EntityRecord>& entities) {
  std::vector<std::string> qids;
  qids.reserve(entities.size());
  for (const auto& e : entities) qids.push_back(e.qid);
  return EntityIndex(std::move(qids));
}

std::pair<std::vector<MentionRecord>, std::size_t> filter_mentions(std::vector<MentionRecord> mentions,
                                                                   const EntityIndex& index) {
  std::vector<MentionRecord> kept;
  kept.reserve(mentions.size());
  std::size_t dropped = 0;
  for (auto& m : mentions) {
    if (index.row(m.gold_qid)) {
      kept.push_back(std::move(m));
    } else {
      ++dropped;
    }
  }
  return {std::move(kept), dropped};
}

namespace {

std::string json_string(const nlohmann::json& obj, std::initializer_list<const char*> keys, std::size_t lineno,
                        bool required) {
  for (const char* k : keys) {
    auto it = obj.find(k);
    if (it == obj.end() || it->is_null()) continue;
    if (it->is_string()) return it->get<std::string>();
    if (it->is_number_integer()) return std::to_string(it->get<long long>());
    throw DataError("jsonl line " + std::to_string(lineno) + ": field '" + k + "' is not a string");
  }
  if (required) {
    throw DataError("jsonl line " + std::to_string(lineno) + ": missing field '" + *keys.begin() + "'");
  }
  return {};
}

nlohmann::json parse_json_line(std::string_view line, std::size_t lineno) {
  try {
    auto j = nlohmann::json::parse(line);
    if (!j.is_object()) throw DataError("jsonl line " + std::to_string(lineno) + ": not an object");
    return j;
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("jsonl line " + std::to_string(lineno) + ": " + e.what());
  }
}

}  // namespace

std::vector<EntityRecord> ingest_entities_jsonl(std::string_view text, int year) {
  std::vector<EntityRecord> out;
  std::unordered_set<std::string> seen;
  auto lines = lines_of(text);
  for (std::size_t k = 0; k < lines.size(); ++k) {
    if (trim(lines[k]).empty()) continue;
    auto j = parse_json_line(lines[k], k + 1);
    EntityRecord e;
    e.qid = json_string(j, {"qid", "wikidata_qid"}, k + 1, true);
    e.title = json_string(j, {"title", "wikipedia_title"}, k + 1, true);
    e.description = json_string(j, {"text", "description"}, k + 1, false);
    e.year = year;
    if (e.qid.empty()) throw DataError("jsonl line " + std::to_string(k + 1) + ": empty qid");
    if (!seen.insert(e.qid).second) {
      throw DataError("jsonl line " + std::to_string(k + 1) + ": duplicate qid " + e.qid);
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<MentionRecord> ingest_mentions_jsonl(std::string_view text, int year) {
  std::vector<MentionRecord> out;
  auto lines = lines_of(text);
  for (std::size_t k = 0; k < lines.size(); ++k) {
    if (trim(lines[k]).empty()) continue;
    auto j = parse_json_line(lines[k], k + 1);
    MentionRecord m;
    m.gold_qid = json_string(j, {"target_qid", "gold_qid", "qid"}, k + 1, true);
    m.context_left = json_string(j, {"context_left"}, k + 1, false);
    m.mention = json_string(j, {"mention"}, k + 1, true);
    m.context_right = json_string(j, {"context_right"}, k + 1, false);
    const auto cat = json_string(j, {"category"}, k + 1, true);
    auto parsed = parse_category(cat);
    if (!parsed) throw DataError("jsonl line " + std::to_string(k + 1) + ": unknown category '" + cat + "'");
    m.category = *parsed;
    m.year = year;
    if (m.mention.empty()) throw DataError("jsonl line " + std::to_string(k + 1) + ": empty mention");
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace tiger
