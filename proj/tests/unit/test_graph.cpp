#include <doctest.h>

#include "tiger/graphbuild.hpp"
#include "tiger/snapshot.hpp"
#include "tiger/util.hpp"

#include <algorithm>
#include <filesystem>
#include <set>
#include <string>

using namespace tiger;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "tiger_unit_graph";
  std::filesystem::create_directories(dir);
  return dir / name;
}

MatrixF rows(std::initializer_list<std::initializer_list<float>> r) {
  MatrixF m(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(r.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& line : r) {
    Eigen::Index j = 0;
    for (float v : line) m(i, j++) = v;
    ++i;
  }
  return m;
}

// Brute-force reference: every node's top-k by cosine, lower index on ties.
std::set<Coord> knn_reference(const MatrixF& e, int k) {
  std::set<Coord> out;
  const auto n = e.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<std::pair<double, Eigen::Index>> c;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const double cos = e.row(i).cast<double>().dot(e.row(j).cast<double>()) /
                         (e.row(i).cast<double>().norm() * e.row(j).cast<double>().norm());
      c.emplace_back(-cos, j);
    }
    std::sort(c.begin(), c.end());
    for (int t = 0; t < k; ++t) out.insert({std::min(i, c[t].second), std::max(i, c[t].second)});
  }
  return out;
}

}  // namespace

TEST_CASE("structure graph filters absent endpoints") {
  const EntityIndex idx({"Q1", "Q2", "Q3"});
  StructureGraphStats st;
  const auto g = build_structure_graph({{"Q1", "r", "Q2"}, {"Q2", "r", "Q9"}}, idx, &st);
  CHECK(g.n == 3);
  CHECK(g.edges == std::vector<Coord>{{0, 1}});
  CHECK(st.kept_triples == 1);
  CHECK(st.skipped_triples == 1);
}

TEST_CASE("structure graph symmetrizes and deduplicates") {
  const EntityIndex idx({"Q1", "Q2", "Q3"});
  const auto g = build_structure_graph({{"Q1", "r", "Q2"}, {"Q2", "s", "Q1"}, {"Q3", "r", "Q3"}}, idx);
  CHECK(g.edges == std::vector<Coord>{{0, 1}});
  CHECK(build_structure_graph({}, idx).edges.empty());
  CHECK(build_structure_graph({}, idx).n == 3);
}

TEST_CASE("knn on three points") {
  const auto g = build_knn_graph(rows({{1, 0}, {0.9f, 0.1f}, {0, 1}}), 1);
  CHECK(g.edges == std::vector<Coord>{{0, 1}, {1, 2}});
}

TEST_CASE("knn with identical rows forms a star on node 0") {
  const auto g = build_knn_graph(rows({{1, 1}, {1, 1}, {1, 1}, {1, 1}}), 1);
  CHECK(g.edges == std::vector<Coord>{{0, 1}, {0, 2}, {0, 3}});
  CHECK(build_knn_graph(rows({{1, 0}, {0, 1}}), 1).edges == std::vector<Coord>{{0, 1}});
}

TEST_CASE("knn errors") {
  CHECK_THROWS_AS(build_knn_graph(rows({{1, 0}, {0, 1}}), 2), std::invalid_argument);
  CHECK_THROWS_AS(build_knn_graph(rows({{1, 0}, {0, 0}, {0, 1}}), 1), std::invalid_argument);
  CHECK_THROWS_AS(build_knn_graph(rows({{1, 0}, {0, 1}}), 0), std::invalid_argument);
}

TEST_CASE("knn matches brute force and grows with k") {
  Rng rng(7);
  MatrixF e(40, 5);
  for (Eigen::Index i = 0; i < e.size(); ++i) e.data()[i] = static_cast<float>(rng.uniform(-1, 1));
  std::size_t prev = 0;
  for (int k = 1; k <= 6; ++k) {
    const auto g = build_knn_graph(e, k);
    const auto ref = knn_reference(e, k);
    CHECK(std::set<Coord>(g.edges.begin(), g.edges.end()) == ref);
    CHECK(g.edges.size() >= prev);
    prev = g.edges.size();
    CHECK(build_knn_graph(e, k, 3) == g);
  }
}

TEST_CASE("hashing embedder is deterministic and ties identical entities") {
  const std::vector<EntityRecord> ents{{"Q1", "Apple", "fruit", 0}, {"Q2", "Apple", "fruit", 0},
                                       {"Q3", "Pear", "other fruit", 0}};
  const auto tok = Tokenizer::build({"apple fruit pear other"}, 32);
  const HashingEmbedder h(tok, 16, 0);
  const auto m = embed_descriptions(ents, h);
  CHECK(m.rows() == 3);
  CHECK(m.cols() == 16);
  CHECK(m.row(0) == m.row(1));
  CHECK(embed_descriptions(ents, h, 2) == m);
  CHECK(embed_descriptions({}, h).rows() == 0);
}

TEST_CASE("feature band is inclusive") {
  // Token counts: a=46, b=45, c=200, d=201.
  std::vector<EntityRecord> ents;
  auto repeat = [](const std::string& t, int c) {
    std::string s;
    for (int i = 0; i < c; ++i) s += t + " ";
    return s;
  };
  ents.push_back({"Q1", "x", repeat("a", 46) + repeat("b", 45), 0});
  ents.push_back({"Q2", "x", repeat("c", 200), 0});
  ents.push_back({"Q3", "x", repeat("d", 201), 0});
  ents.push_back({"Q4", "x", "", 0});
  const auto tok = Tokenizer::build({"a b c d x"}, 128);
  VocabFilter f;
  const auto x = build_feature_matrix(ents, tok, f);
  CHECK(f.counts.at(tok.id("a")) == 46);
  CHECK(x.column_tokens == std::vector<TokenId>{tok.id("a"), tok.id("c")});
  CHECK(x.ones == std::vector<Coord>{{0, 0}, {1, 1}});
  CHECK(x.n == 4);
  CHECK(f.retains(tok.id("c")));
  CHECK_FALSE(f.retains(tok.id("d")));
}

TEST_CASE("feature matrix with nothing retained throws") {
  const auto tok = Tokenizer::build({"a"}, 16);
  VocabFilter f;
  CHECK_THROWS_AS(build_feature_matrix({{"Q1", "x", "a", 0}}, tok, f), DataError);
}

TEST_CASE("sparse file round trip and checksum") {
  const auto g = build_knn_graph(rows({{1, 0}, {0.9f, 0.1f}, {0, 1}}), 1);
  const auto path = scratch("knn.adj");
  save_adjacency(g, path);
  CHECK(load_adjacency(path) == g);
  const CooMatrix empty{0, 0, {}};
  CHECK(parse_matrix(serialize_matrix(empty)) == empty);
  const CooMatrix x{2, 3, {{0, 2}, {1, 0}}};
  CHECK(parse_matrix(serialize_matrix(x)) == x);
  auto text = serialize_matrix(x);
  CHECK_THROWS_AS(parse_matrix(text.substr(0, text.size() - 2)), FormatError);
  text[text.size() - 2] = '1';
  CHECK_THROWS_AS(parse_matrix(text), FormatError);
  CHECK_THROWS_AS(parse_matrix("SPARSE v2\t0\t0\t0\t0000000000000000\n"), FormatError);
}

TEST_CASE("saved graphs reload") {
  Snapshot s;
  s.entities = {{"Q1", "alpha", "red blue", 0}, {"Q2", "beta", "red green", 0}, {"Q3", "gamma", "blue green", 0}};
  s.index = build_entity_index(s.entities);
  s.triples = {{"Q1", "P", "Q3"}};
  GraphBuildConfig cfg;
  cfg.k = 1;
  cfg.min_count = 2;
  cfg.max_count = 5;
  const auto tok = snapshot_tokenizer(s, 32);
  build_snapshot_graphs(s, tok, cfg);
  CHECK(s.graphs.structure.edges == std::vector<Coord>{{0, 2}});
  CHECK(s.graphs.features.m == 3);
  const auto dir = scratch("graphs");
  save_graphs(s.graphs, tok, dir);
  const auto back = load_graphs(dir, tok);
  CHECK(back.structure == s.graphs.structure);
  CHECK(back.feature == s.graphs.feature);
  CHECK(back.features == s.graphs.features);
}
