#include "synthetic.hpp"

#include "tiger/util.hpp"

#include <string>
#include <vector>

namespace synth {

namespace {

std::string title_of(int pair) { return "name" + std::to_string(pair); }

}  // namespace

tiger::Snapshot make_pair_fixture(const PairFixtureSpec& spec) {
  tiger::Snapshot snap;
  snap.year = 2020;
  const int n = 2 * spec.pairs;
  std::vector<std::string> qids;
  for (int e = 0; e < n; ++e) {
    const int p = e / 2;
    const std::string qid = "Q" + std::to_string(1000 + e);
    qids.push_back(qid);
    snap.entities.push_back({qid, title_of(p),
                             "item " + title_of(p) + " of group" + std::to_string(p % 10) + " and kind" +
                                 std::to_string(p % 7),
                             snap.year});
  }
  snap.index = tiger::EntityIndex(qids);

  // Twin s of pair p links to pairs p + 1 + s * neighbors + j, so the two
  // twins reach disjoint pair sets.
  std::vector<std::vector<int>> neighbors(static_cast<std::size_t>(n));
  for (int e = 0; e < n; ++e) {
    const int p = e / 2, s = e % 2;
    for (int j = 0; j < spec.neighbors; ++j) {
      const int q = (p + 1 + s * spec.neighbors + j) % spec.pairs;
      const int other = 2 * q + ((p + j) % 2);
      neighbors[static_cast<std::size_t>(e)].push_back(q);
      snap.triples.push_back({qids[static_cast<std::size_t>(e)], "P1", qids[static_cast<std::size_t>(other)]});
    }
  }

  tiger::Rng rng(spec.seed);
  auto mention = [&](int gold) {
    auto nb = neighbors[static_cast<std::size_t>(gold)];
    rng.shuffle(nb);
    std::string left = "about";
    for (std::size_t j = 0; j + 1 < nb.size(); ++j) left += " " + title_of(nb[j]);
    tiger::MentionRecord m;
    m.context_left = left + " and";
    m.mention = title_of(gold / 2);
    m.context_right = "near " + title_of(nb.back());
    m.gold_qid = qids[static_cast<std::size_t>(gold)];
    m.category = tiger::Category::continual;
    m.year = snap.year;
    return m;
  };
  for (int i = 0; i < spec.train_mentions; ++i) {
    snap.train_mentions.push_back(mention(static_cast<int>(rng.below(static_cast<std::uint64_t>(n)))));
  }
  for (int i = 0; i < spec.test_mentions; ++i) {
    snap.test_mentions.push_back(mention(static_cast<int>(rng.below(static_cast<std::uint64_t>(n)))));
  }

  tiger::GraphBuildConfig g;
  g.k = 5;
  g.min_count = 2;
  g.max_count = 400;
  g.embed_dim = 64;
  const auto tok = tiger::snapshot_tokenizer(snap, g.max_len);
  tiger::build_snapshot_graphs(snap, tok, g);
  return snap;
}

}  // namespace synth
