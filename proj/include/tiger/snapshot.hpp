#pragma once

#include "tiger/corpus.hpp"
#include "tiger/graphbuild.hpp"
#include "tiger/tokenizer.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace tiger {

/// One year's entities, mentions, and graphs.
struct Snapshot {
  int year = 0;
  std::vector<EntityRecord> entities;
  EntityIndex index;
  std::vector<MentionRecord> train_mentions;
  std::vector<MentionRecord> test_mentions;
  std::vector<RelationTriple> triples;
  SnapshotGraphs graphs;
};

struct SnapshotPaths {
  std::filesystem::path entities;
  std::filesystem::path mentions;       // training mentions
  std::filesystem::path test_mentions;  // optional
  std::filesystem::path triples;        // optional
};

struct LoadStats {
  std::size_t dropped_train = 0;
  std::size_t dropped_test = 0;
};

/// Loads the TSV files and drops mentions with an unknown gold qid.
Snapshot load_snapshot(int year, const SnapshotPaths& paths, LoadStats* stats = nullptr);

enum class EmbedderKind { hashing, encoder };

struct GraphBuildConfig {
  int k = 10;
  std::int64_t min_count = 46;
  std::int64_t max_count = 200;
  EmbedderKind embedder = EmbedderKind::hashing;
  int embed_dim = 64;
  std::uint64_t seed = 0;
  int max_len = 128;
  int workers = 1;
};

/// Vocabulary over the snapshot's entities and training mentions.
Tokenizer snapshot_tokenizer(const Snapshot& snapshot, int max_len);

/// Fills snapshot.graphs (structure graph, kNN feature graph, feature matrix).
void build_snapshot_graphs(Snapshot& snapshot, const Tokenizer& tokenizer, const GraphBuildConfig& cfg,
                           StructureGraphStats* stats = nullptr);

/// Keeps only mentions of the given category; "all" keeps everything.
std::vector<MentionRecord> select_category(const std::vector<MentionRecord>& mentions, const std::string& category);

}  // namespace tiger
