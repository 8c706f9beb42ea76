#pragma once

// Per-snapshot graph construction: the relation (structure) graph, the kNN
// feature graph over description embeddings, and the binary feature matrix.

#include "tiger/corpus.hpp"
#include "tiger/graph_types.hpp"
#include "tiger/numerics/matrix.hpp"
#include "tiger/tokenizer.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace tiger {

struct StructureGraphStats {
  std::size_t kept_triples = 0;
  std::size_t skipped_triples = 0;
};

/// Edge {i, j} iff some triple links the two qids and both are indexed.
/// Direction and relation id are discarded; self-relations are dropped.
AdjacencyMatrix build_structure_graph(const std::vector<RelationTriple>& triples, const EntityIndex& index,
                                      StructureGraphStats* stats = nullptr);

/// Maps an entity's rendered description to a fixed-width vector.
class DescriptionEmbedder {
 public:
  virtual ~DescriptionEmbedder() = default;
  virtual Eigen::Index dim() const = 0;
  virtual RowVector<float> embed(const EntityRecord& entity) const = 0;
};

/// Signed feature hashing over the rendered entity template: each token adds
/// +-1 to bucket fnv1a64(token) mod dim, the sign taken from the hash's top bit.
class HashingEmbedder final : public DescriptionEmbedder {
 public:
  HashingEmbedder(const Tokenizer& tokenizer, Eigen::Index dim, std::uint64_t seed = 0);
  Eigen::Index dim() const override { return dim_; }
  RowVector<float> embed(const EntityRecord& entity) const override;

 private:
  const Tokenizer* tokenizer_;
  Eigen::Index dim_;
  std::uint64_t seed_;
};

MatrixF embed_descriptions(const std::vector<EntityRecord>& entities, const DescriptionEmbedder& embedder,
                           int workers = 1);

/// Union-symmetrized kNN graph under cosine similarity. Ties go to the lower
/// row index. Throws when k >= n, k < 1, or a row has zero norm.
AdjacencyMatrix build_knn_graph(const MatrixF& embeddings, int k, int workers = 1);

struct VocabFilter {
  std::int64_t min_count = 46;
  std::int64_t max_count = 200;
  std::map<TokenId, std::int64_t> counts;

  bool retains(TokenId t) const;
  std::vector<TokenId> retained() const;
};

/// Counts token occurrences over all descriptions into filter.counts, keeps
/// the inclusive [min_count, max_count] band as columns in ascending id
/// order, and marks X[i, j] = 1 when description i contains column j's token.
FeatureMatrix build_feature_matrix(const std::vector<EntityRecord>& entities, const Tokenizer& tokenizer,
                                   VocabFilter& filter);

struct SnapshotGraphs {
  AdjacencyMatrix structure;
  AdjacencyMatrix feature;
  FeatureMatrix features;
};

/// Writes structure.adj, feature.adj, feature.mat and feature.columns (one
/// token string per column) under `dir`.
void save_graphs(const SnapshotGraphs& g, const Tokenizer& tokenizer, const std::filesystem::path& dir);
SnapshotGraphs load_graphs(const std::filesystem::path& dir, const Tokenizer& tokenizer);

}  // namespace tiger
