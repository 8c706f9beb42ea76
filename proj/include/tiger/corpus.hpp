#pragma once

// Snapshot ingest: entity descriptions, mention contexts and KG triples in the
// canonical tab-separated format, plus the qid <-> row addressing every
// positional matrix relies on.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace tiger {

/// Bad input data (malformed line, duplicate id, unknown category, ...).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EntityRecord {
  std::string qid;
  std::string title;
  std::string description;
  int year = 0;

  friend bool operator==(const EntityRecord&, const EntityRecord&) = default;
};

enum class Category { continual, new_entity };

std::string_view to_string(Category c);
std::optional<Category> parse_category(std::string_view s);

struct MentionRecord {
  std::string context_left;
  std::string mention;
  std::string context_right;
  std::string gold_qid;
  Category category = Category::continual;
  int year = 0;

  friend bool operator==(const MentionRecord&, const MentionRecord&) = default;
};

struct RelationTriple {
  std::string head_qid;
  std::string relation_id;
  std::string tail_qid;

  friend bool operator==(const RelationTriple&, const RelationTriple&) = default;
};

class EntityIndex {
 public:
  EntityIndex() = default;

  /// Row i is the i-th qid. Throws DataError on a duplicate.
  explicit EntityIndex(std::vector<std::string> qids);

  std::int64_t size() const { return static_cast<std::int64_t>(qids_.size()); }
  std::optional<std::int64_t> row(std::string_view qid) const;
  const std::string& qid(std::int64_t row) const { return qids_.at(static_cast<std::size_t>(row)); }
  const std::vector<std::string>& qids() const { return qids_; }

  /// index.manifest: line k holds the qid of row k.
  std::string serialize() const;
  static EntityIndex parse(std::string_view text);
  void save(const std::filesystem::path& path) const;
  static EntityIndex load(const std::filesystem::path& path);

  friend bool operator==(const EntityIndex& a, const EntityIndex& b) { return a.qids_ == b.qids_; }

 private:
  std::vector<std::string> qids_;
  std::unordered_map<std::string, std::int64_t> rows_;
};

// Text fields escape backslash, tab, newline and carriage return as \\ \t \n \r.
std::string escape_field(std::string_view s);
std::string unescape_field(std::string_view s);

std::vector<EntityRecord> parse_entities(std::string_view text, int year);
std::vector<MentionRecord> parse_mentions(std::string_view text, int year);
std::vector<RelationTriple> parse_triples(std::string_view text);

std::string serialize_entities(const std::vector<EntityRecord>& entities);
std::string serialize_mentions(const std::vector<MentionRecord>& mentions);
std::string serialize_triples(const std::vector<RelationTriple>& triples);

std::vector<EntityRecord> load_entities(const std::filesystem::path& path, int year);
std::vector<MentionRecord> load_mentions(const std::filesystem::path& path, int year);
std::vector<RelationTriple> load_triples(const std::filesystem::path& path);

struct CategorySplit {
  std::vector<MentionRecord> continual;
  std::vector<MentionRecord> new_entities;
};

CategorySplit split_by_category(const std::vector<MentionRecord>& mentions);

EntityIndex build_entity_index(const std::vector<EntityRecord>& entities);

/// Drops mentions whose gold qid is not in `index`; the count of dropped
/// mentions is returned alongside.
std::pair<std::vector<MentionRecord>, std::size_t> filter_mentions(std::vector<MentionRecord> mentions,
                                                                   const EntityIndex& index);

// Conversion of upstream dumps into the canonical format.
//
// Entity JSON lines carry "qid" (or "wikidata_qid"), "title" (or
// "wikipedia_title") and "text" (or "description"). Mention JSON lines carry
// "context_left", "mention", "context_right", "category" and the gold id
// under "target_qid", "gold_qid" or "qid". Wikidata5M triple files are
// already tab-separated head/relation/tail and are validated as they are read.
std::vector<EntityRecord> ingest_entities_jsonl(std::string_view text, int year);
std::vector<MentionRecord> ingest_mentions_jsonl(std::string_view text, int year);

}  // namespace tiger
