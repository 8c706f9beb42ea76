#include "tiger/graphbuild.hpp"

#include "tiger/util.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace tiger {

AdjacencyMatrix build_structure_graph(const std::vector<RelationTriple>& triples, const EntityIndex& index,
                                      StructureGraphStats* stats) {
  std::vector<Coord> pairs;
  StructureGraphStats local;
  for (const auto& t : triples) {
    auto h = index.row(t.head_qid);
    auto r = index.row(t.tail_qid);
    if (!h || !r) {
      ++local.skipped_triples;
      continue;
    }
    ++local.kept_triples;
    pairs.emplace_back(*h, *r);
  }
  if (stats) *stats = local;
  return AdjacencyMatrix::from_pairs(index.size(), std::move(pairs));
}

HashingEmbedder::HashingEmbedder(const Tokenizer& tokenizer, Eigen::Index dim, std::uint64_t seed)
    : tokenizer_(&tokenizer), dim_(dim), seed_(seed) {
  if (dim <= 0) throw std::invalid_argument("hashing embedder: dim must be positive");
}

RowVector<float> HashingEmbedder::embed(const EntityRecord& entity) const {
  RowVector<float> v = RowVector<float>::Zero(dim_);
  for (const auto& tok : tokenizer_->render_entity_tokens(entity)) {
    const std::uint64_t h = fnv1a64(tok, 0xcbf29ce484222325ULL ^ seed_);
    const auto bucket = static_cast<Eigen::Index>(h % static_cast<std::uint64_t>(dim_));
    v(bucket) += (h >> 63) ? -1.0f : 1.0f;
  }
  return v;
}

MatrixF embed_descriptions(const std::vector<EntityRecord>& entities, const DescriptionEmbedder& embedder,
                           int workers) {
  MatrixF out(static_cast<Eigen::Index>(entities.size()), embedder.dim());
  parallel_for(entities.size(), workers, [&](std::size_t i) {
    out.row(static_cast<Eigen::Index>(i)) = embedder.embed(entities[i]);
  });
  return out;
}

AdjacencyMatrix build_knn_graph(const MatrixF& embeddings, int k, int workers) {
  const auto n = embeddings.rows();
  if (k < 1) throw std::invalid_argument("knn graph: k must be >= 1");
  if (n < 2) throw std::invalid_argument("knn graph: needs at least 2 nodes");
  if (k >= n) {
    throw std::invalid_argument("knn graph: k=" + std::to_string(k) + " must be smaller than n=" + std::to_string(n));
  }
  const MatrixD e = embeddings.cast<double>();
  std::vector<double> norms(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    double sq = 0.0;
    for (Eigen::Index c = 0; c < e.cols(); ++c) sq += e(i, c) * e(i, c);
    norms[static_cast<std::size_t>(i)] = std::sqrt(sq);
    if (!(norms[static_cast<std::size_t>(i)] > 0.0)) {
      throw std::invalid_argument("knn graph: embedding row " + std::to_string(i) + " has zero norm");
    }
  }

  std::vector<std::vector<std::int64_t>> picks(static_cast<std::size_t>(n));
  parallel_for(static_cast<std::size_t>(n), workers, [&](std::size_t iu) {
    const auto i = static_cast<Eigen::Index>(iu);
    std::vector<std::pair<double, std::int64_t>> cand;
    cand.reserve(static_cast<std::size_t>(n - 1));
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      double dot = 0.0;
      for (Eigen::Index c = 0; c < e.cols(); ++c) dot += e(i, c) * e(j, c);
      cand.emplace_back(dot / (norms[iu] * norms[static_cast<std::size_t>(j)]), j);
    }
    auto better = [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    };
    std::partial_sort(cand.begin(), cand.begin() + k, cand.end(), better);
    for (int r = 0; r < k; ++r) picks[iu].push_back(cand[static_cast<std::size_t>(r)].second);
  });

  std::vector<Coord> pairs;
  pairs.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (auto j : picks[static_cast<std::size_t>(i)]) pairs.emplace_back(i, j);
  }
  return AdjacencyMatrix::from_pairs(n, std::move(pairs));
}

bool VocabFilter::retains(TokenId t) const {
  auto it = counts.find(t);
  return it != counts.end() && it->second >= min_count && it->second <= max_count;
}

std::vector<TokenId> VocabFilter::retained() const {
  std::vector<TokenId> out;
  for (auto [t, c] : counts) {
    if (c >= min_count && c <= max_count) out.push_back(t);
  }
  return out;
}

FeatureMatrix build_feature_matrix(const std::vector<EntityRecord>& entities, const Tokenizer& tokenizer,
                                   VocabFilter& filter) {
  if (filter.min_count > filter.max_count) {
    throw std::invalid_argument("feature matrix: min_count " + std::to_string(filter.min_count) +
                                " exceeds max_count " + std::to_string(filter.max_count));
  }
  std::vector<TokenSeq> docs;
  docs.reserve(entities.size());
  filter.counts.clear();
  for (const auto& e : entities) {
    docs.push_back(tokenizer.encode(e.description));
    for (auto t : docs.back()) ++filter.counts[t];
  }
  FeatureMatrix x;
  x.n = static_cast<std::int64_t>(entities.size());
  x.column_tokens = filter.retained();
  x.m = static_cast<std::int64_t>(x.column_tokens.size());
  if (x.m == 0) {
    throw DataError("feature matrix: no token has a corpus count within [" + std::to_string(filter.min_count) +
                    ", " + std::to_string(filter.max_count) + "]; widen --min-count/--max-count");
  }
  std::map<TokenId, std::int64_t> column_of;
  for (std::size_t j = 0; j < x.column_tokens.size(); ++j) column_of[x.column_tokens[j]] = static_cast<std::int64_t>(j);
  for (std::size_t i = 0; i < docs.size(); ++i) {
    std::set<std::int64_t> cols;
    for (auto t : docs[i]) {
      if (auto it = column_of.find(t); it != column_of.end()) cols.insert(it->second);
    }
    for (auto c : cols) x.ones.emplace_back(static_cast<std::int64_t>(i), c);
  }
  return x;
}

void save_graphs(const SnapshotGraphs& g, const Tokenizer& tokenizer, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  save_adjacency(g.structure, dir / "structure.adj");
  save_adjacency(g.feature, dir / "feature.adj");
  save_matrix(g.features.as_coo(), dir / "feature.mat");
  std::string cols;
  for (auto t : g.features.column_tokens) cols += tokenizer.token(t) + "\n";
  write_file_atomic(dir / "feature.columns", cols);
}

SnapshotGraphs load_graphs(const std::filesystem::path& dir, const Tokenizer& tokenizer) {
  SnapshotGraphs g;
  g.structure = load_adjacency(dir / "structure.adj");
  g.feature = load_adjacency(dir / "feature.adj");
  auto coo = load_matrix(dir / "feature.mat");
  g.features.n = coo.rows;
  g.features.m = coo.cols;
  g.features.ones = std::move(coo.ones);
  auto lines = split(read_file(dir / "feature.columns"), '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (static_cast<std::int64_t>(lines.size()) != g.features.m) {
    throw FormatError("feature.columns has " + std::to_string(lines.size()) + " entries, matrix has " +
                      std::to_string(g.features.m) + " columns");
  }
  for (const auto& tok : lines) g.features.column_tokens.push_back(tokenizer.id(tok));
  return g;
}

}  // namespace tiger
