#pragma once

#include "tiger/snapshot.hpp"

#include <cstdint>

namespace synth {

struct PairFixtureSpec {
  int pairs = 100;
  int neighbors = 3;      // structure neighbours per entity
  int train_mentions = 500;
  int test_mentions = 200;
  std::uint64_t seed = 42;
};

/// Entities 2p and 2p+1 share title and description; their structure
/// neighbourhoods come from disjoint sets of other pairs. Mention contexts
/// name the gold entity's neighbours. Graphs are built with k = 5 and a
/// feature band of [2, 400].
tiger::Snapshot make_pair_fixture(const PairFixtureSpec& spec = {});

}  // namespace synth
