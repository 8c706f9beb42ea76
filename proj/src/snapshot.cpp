#include "tiger/snapshot.hpp"

#include "tiger/model.hpp"

namespace tiger {

Snapshot load_snapshot(int year, const SnapshotPaths& paths, LoadStats* stats) {
  Snapshot s;
  s.year = year;
  s.entities = load_entities(paths.entities, year);
  s.index = build_entity_index(s.entities);
  LoadStats local;
  auto [train, dropped] = filter_mentions(load_mentions(paths.mentions, year), s.index);
  s.train_mentions = std::move(train);
  local.dropped_train = dropped;
  if (!paths.test_mentions.empty()) {
    auto [test, dropped_test] = filter_mentions(load_mentions(paths.test_mentions, year), s.index);
    s.test_mentions = std::move(test);
    local.dropped_test = dropped_test;
  }
  if (!paths.triples.empty()) s.triples = load_triples(paths.triples);
  if (stats) *stats = local;
  return s;
}

Tokenizer snapshot_tokenizer(const Snapshot& snapshot, int max_len) {
  return Tokenizer::build(vocabulary_corpus(snapshot.entities, snapshot.train_mentions), max_len);
}

namespace {

/// Entity encoder in its freshly initialized state.
class EncoderEmbedder final : public DescriptionEmbedder {
 public:
  EncoderEmbedder(const Tokenizer& tok, const ModelConfig& cfg, std::uint64_t seed)
      : tokenizer_(&tok), model_(cfg, seed) {}
  Eigen::Index dim() const override { return model_.config().dim; }
  RowVector<float> embed(const EntityRecord& e) const override {
    // encode_value only reads parameters; the const_cast does not mutate state.
    return const_cast<Model<float>&>(model_).entity_encoder().encode_value(tokenizer_->render_entity(e));
  }

 private:
  const Tokenizer* tokenizer_;
  Model<float> model_;
};

}  // namespace

void build_snapshot_graphs(Snapshot& snapshot, const Tokenizer& tokenizer, const GraphBuildConfig& cfg,
                           StructureGraphStats* stats) {
  snapshot.graphs.structure = build_structure_graph(snapshot.triples, snapshot.index, stats);
  MatrixF emb;
  if (cfg.embedder == EmbedderKind::hashing) {
    emb = embed_descriptions(snapshot.entities, HashingEmbedder(tokenizer, cfg.embed_dim, cfg.seed), cfg.workers);
  } else {
    ModelConfig mc;
    mc.vocab_size = static_cast<int>(tokenizer.vocab_size());
    mc.max_len = cfg.max_len;
    mc.dim = cfg.embed_dim;
    mc.graph_branch = false;
    emb = embed_descriptions(snapshot.entities, EncoderEmbedder(tokenizer, mc, cfg.seed), cfg.workers);
  }
  snapshot.graphs.feature = build_knn_graph(emb, cfg.k, cfg.workers);
  VocabFilter filter{cfg.min_count, cfg.max_count, {}};
  snapshot.graphs.features = build_feature_matrix(snapshot.entities, tokenizer, filter);
}

std::vector<MentionRecord> select_category(const std::vector<MentionRecord>& mentions, const std::string& category) {
  if (category == "all") return mentions;
  auto split = split_by_category(mentions);
  if (category == "continual") return split.continual;
  if (category == "new") return split.new_entities;
  throw std::invalid_argument("unknown category '" + category + "' (expected all, continual or new)");
}

}  // namespace tiger
