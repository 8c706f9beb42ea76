#include <doctest.h>

#include "../support/synthetic.hpp"
#include "tiger/trainer.hpp"

#include <algorithm>
#include <numeric>

using namespace tiger;

namespace {

const Snapshot& small_fixture() {
  static const Snapshot s = [] {
    synth::PairFixtureSpec spec;
    spec.pairs = 12;
    spec.train_mentions = 40;
    spec.test_mentions = 10;
    return synth::make_pair_fixture(spec);
  }();
  return s;
}

ModelConfig small_model() {
  ModelConfig m;
  m.dim = 8;
  m.encoder_layers = 1;
  m.gcn_hidden = 6;
  m.gcn_out = 4;
  return m;
}

TrainConfig small_train() {
  TrainConfig t;
  t.learning_rate = 1e-3;
  t.batch_size = 8;
  t.seed = 3;
  return t;
}

}  // namespace

TEST_CASE("batches cover every mention once") {
  const auto b = make_batches(5, 2, 1);
  REQUIRE(b.size() == 3);
  CHECK(b[0].size() == 2);
  CHECK(b[1].size() == 2);
  CHECK(b[2].size() == 1);
  CHECK(make_batches(5, 2, 1) == b);
  auto flat = [](const std::vector<std::vector<int>>& v) {
    std::vector<int> out;
    for (const auto& x : v) out.insert(out.end(), x.begin(), x.end());
    return out;
  };
  const auto a = flat(make_batches(50, 7, 1)), c = flat(make_batches(50, 7, 2));
  CHECK(a != c);
  auto sa = a, sc = c;
  std::sort(sa.begin(), sa.end());
  std::sort(sc.begin(), sc.end());
  std::vector<int> iota(50);
  std::iota(iota.begin(), iota.end(), 0);
  CHECK(sa == iota);
  CHECK(sc == iota);
  CHECK_THROWS_AS(make_batches(5, 0, 1), std::invalid_argument);
}

TEST_CASE("config validation") {
  TrainConfig t;
  CHECK_NOTHROW(t.validate());
  t.learning_rate = 0;
  CHECK_THROWS_AS(t.validate(), std::invalid_argument);
}

TEST_CASE("meta round trip preserves configs") {
  auto m = small_model();
  m.encoder = EncoderKind::average;
  m.feature_dim = 17;
  auto t = small_train();
  t.weights = {0.25, 0.125};
  t.negatives = NegativeMode::global;
  t.num_negatives = 5;
  const auto mm = model_config_from_meta(to_meta(m));
  CHECK(mm.dim == m.dim);
  CHECK(mm.encoder == EncoderKind::average);
  CHECK(mm.feature_dim == 17);
  const auto tt = train_config_from_meta(to_meta(t));
  CHECK(tt.learning_rate == t.learning_rate);
  CHECK(tt.weights.b == 0.125);
  CHECK(tt.negatives == NegativeMode::global);
  CHECK(tt.num_negatives == 5);
}

TEST_CASE("identical runs give byte-identical checkpoints") {
  const auto& s = small_fixture();
  Trainer a(s, s.train_mentions, small_model(), small_train());
  Trainer b(s, s.train_mentions, small_model(), small_train());
  a.train(2);
  b.train(2);
  CHECK(a.checkpoint().serialize() == b.checkpoint().serialize());
  CHECK(a.step() == 10);
  Trainer fresh(s, s.train_mentions, small_model(), small_train());
  CHECK(fresh.train(1).front().step == 0);
  CHECK(a.epoch() == 2);
}

TEST_CASE("zero epochs leave the initial checkpoint") {
  const auto& s = small_fixture();
  Trainer a(s, s.train_mentions, small_model(), small_train());
  const auto before = a.checkpoint().serialize();
  CHECK(a.train(0).empty());
  CHECK(a.checkpoint().serialize() == before);
}

TEST_CASE("resume continues the step counter and trajectory") {
  const auto& s = small_fixture();
  Trainer straight(s, s.train_mentions, small_model(), small_train());
  straight.train(2);

  Trainer first(s, s.train_mentions, small_model(), small_train());
  first.train(1);
  const auto saved = Checkpoint::parse(first.checkpoint().serialize());
  Trainer resumed(s, s.train_mentions, saved);
  CHECK(resumed.step() == first.step());
  const auto curve = resumed.train(1);
  CHECK(curve.front().step == first.step());
  CHECK(resumed.step() == straight.step());
  CHECK(resumed.checkpoint().serialize() == straight.checkpoint().serialize());
}

TEST_CASE("checkpoint reloads for inference") {
  const auto& s = small_fixture();
  Trainer a(s, s.train_mentions, small_model(), small_train());
  a.train(1);
  const auto ckpt = a.checkpoint();
  auto loaded = load_model(ckpt);
  CHECK(loaded.tokenizer.vocabulary() == a.tokenizer().vocabulary());
  const auto seq = a.tokenizer().render_entity(s.entities[3]);
  CHECK(loaded.model->entity_encoder().encode_value(seq) == a.model().entity_encoder().encode_value(seq));
  CHECK(ckpt.find("adam.m.fusion.p") != nullptr);
  CHECK(ckpt.find("adam.v.gcn.ws0") != nullptr);
}

TEST_CASE("zero graph weights leave only the linking gradient") {
  ModelConfig cfg;
  cfg.vocab_size = 12;
  cfg.max_len = 8;
  cfg.dim = 4;
  cfg.encoder_layers = 1;
  cfg.feature_dim = 3;
  cfg.gcn_hidden = 3;
  cfg.gcn_out = 2;
  FeatureMatrix x{4, 3, {{0, 0}, {1, 1}, {2, 2}, {3, 0}, {3, 2}}, {7, 8, 9}};
  const auto g = make_graph_inputs<double>(AdjacencyMatrix::from_pairs(4, {{0, 1}, {2, 3}}),
                                           AdjacencyMatrix::from_pairs(4, {{0, 2}, {1, 3}}), x);
  BatchInputs batch;
  batch.mentions = {{2, 7, 4, 8, 5, 3}, {2, 4, 9, 5, 10, 3}};
  batch.candidates = {{2, 8, 6, 3}, {2, 9, 6, 11, 3}};
  batch.candidate_rows = {1, 3};
  batch.gold = {0, 1};

  auto grads = [&](const LossWeights& w, bool el_only) {
    Model<double> m(cfg, 2);
    for (auto* p : m.parameters()) p->zero_grad();
    Tape<double> tape;
    auto l = compute_losses(tape, m, &g, batch, w);
    tape.backward(el_only ? l.el : l.total);
    std::vector<MatrixD> out;
    for (auto* p : m.parameters()) out.push_back(p->grad);
    return out;
  };
  const auto zero_w = grads({0, 0}, false);
  const auto el = grads({0.5, 0.01}, true);
  REQUIRE(zero_w.size() == el.size());
  for (std::size_t i = 0; i < el.size(); ++i) CHECK((zero_w[i] - el[i]).cwiseAbs().maxCoeff() < 1e-15);
  // L_e still reaches the graph stacks through the fusion head.
  Model<double> probe(cfg, 2);
  const auto gcn_count = probe.gcn().parameters().size();
  const auto first_gcn = probe.text_parameters().size();
  bool any = false;
  for (std::size_t i = first_gcn; i < first_gcn + gcn_count; ++i) any = any || !zero_w[i].isZero();
  CHECK(any);
}

TEST_CASE("frozen fusion with zero weights matches a text-only build bit for bit") {
  const auto& s = small_fixture();
  auto tc = small_train();
  tc.weights = {0, 0};
  tc.freeze_fusion_zero = true;
  Trainer graph(s, s.train_mentions, small_model(), tc);
  auto text_cfg = small_model();
  text_cfg.graph_branch = false;
  auto tc2 = tc;
  tc2.freeze_fusion_zero = false;
  Trainer text(s, s.train_mentions, text_cfg, tc2);
  const auto ca = graph.train(3), cb = text.train(3);
  REQUIRE(ca.size() == cb.size());
  for (std::size_t i = 0; i < ca.size(); ++i) CHECK(ca[i].el == cb[i].el);
  auto pa = graph.model().text_parameters(), pb = text.model().text_parameters();
  REQUIRE(pa.size() == pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) {
    CHECK(pa[i]->name == pb[i]->name);
    CHECK(pa[i]->value == pb[i]->value);
  }
}

TEST_CASE("two hundred steps cut the training linking loss by ninety percent") {
  const auto s = synth::make_pair_fixture();
  ModelConfig m;
  m.dim = 32;
  m.encoder_layers = 1;
  m.gcn_hidden = 16;
  m.gcn_out = 8;
  TrainConfig t;
  t.learning_rate = 5e-3;
  t.batch_size = 32;
  t.seed = 0;
  Trainer tr(s, s.train_mentions, m, t);
  const auto batches = make_batches(tr.mention_count(), t.batch_size, 99);
  auto mean_el = [&] {
    double acc = 0;
    for (const auto& b : batches) acc += tr.evaluate_losses(b).el;
    return acc / static_cast<double>(batches.size());
  };
  const double initial = mean_el();
  while (tr.step() < 200) {
    for (const auto& b : make_batches(tr.mention_count(), t.batch_size, static_cast<std::uint64_t>(tr.step()))) {
      if (tr.step() >= 200) break;
      tr.train_step(b);
    }
  }
  const double final_el = mean_el();
  MESSAGE("L_e " << initial << " -> " << final_el);
  CHECK(final_el < initial);
  CHECK(final_el <= 0.1 * initial);
}

TEST_CASE("non-finite loss aborts with a numeric error") {
  const auto& s = small_fixture();
  auto tc = small_train();
  Trainer tr(s, s.train_mentions, small_model(), tc);
  tr.model().find("mention_encoder.tok_embed")->value.setConstant(std::numeric_limits<float>::infinity());
  CHECK_THROWS_AS(tr.train_step({0, 1}), NumericError);
}
