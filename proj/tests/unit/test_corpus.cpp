#include <doctest.h>

#include "tiger/corpus.hpp"
#include "tiger/tokenizer.hpp"
#include "tiger/util.hpp"

#include <filesystem>
#include <string>

using namespace tiger;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "tiger_unit_corpus";
  std::filesystem::create_directories(dir);
  return dir / name;
}

bool message_contains(const std::exception& e, const std::string& needle) {
  return std::string(e.what()).find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("entities parse in file order") {
  const auto v = parse_entities("Q1\tApple Inc.\tAmerican technology company\nQ2\tApple\tEdible fruit\n", 2020);
  REQUIRE(v.size() == 2);
  CHECK(v[0].qid == "Q1");
  CHECK(v[1].qid == "Q2");
  CHECK(v[0].title == "Apple Inc.");
  CHECK(v[1].year == 2020);
  CHECK(parse_entities("", 2020).empty());
}

TEST_CASE("duplicate entity qid names the qid and line") {
  try {
    parse_entities("Q1\ta\tb\nQ1\tc\td\n", 2020);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(message_contains(e, "Q1"));
    CHECK(message_contains(e, "line 2"));
  }
}

TEST_CASE("entity file round trip through disk") {
  const std::vector<EntityRecord> in{{"Q5", "Tab\there", "line\nbreak \\ slash", 2019}, {"Q6", "x", "", 2019}};
  const auto path = scratch("entities.tsv");
  write_file_atomic(path, serialize_entities(in));
  CHECK(load_entities(path, 2019) == in);
}

TEST_CASE("mentions parse with category") {
  const auto v = parse_mentions("Q7\tnew\tthe\tWildcats\tfootball team\n", 2021);
  REQUIRE(v.size() == 1);
  CHECK(v[0].category == Category::new_entity);
  CHECK(v[0].gold_qid == "Q7");
  CHECK(v[0].context_left == "the");
  CHECK(v[0].mention == "Wildcats");
  CHECK(v[0].context_right == "football team");
  CHECK_THROWS_AS(parse_mentions("Q7\told\ta\tb\tc\n", 2021), DataError);
  try {
    parse_mentions("Q7\tnew\ta\tb\n", 2021);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(message_contains(e, "line 1"));
  }
}

TEST_CASE("mention records survive serialize and parse") {
  const std::vector<MentionRecord> in{{"left\tctx", "m", "", "Q1", Category::continual, 2020},
                                      {"", "Cats", "r\\s", "Q2", Category::new_entity, 2020}};
  CHECK(parse_mentions(serialize_mentions(in), 2020) == in);
}

TEST_CASE("triples keep unknown endpoints and reject short lines") {
  const auto v = parse_triples("Q1\tP31\tQ2\nQ1\tP31\tQ999\n");
  REQUIRE(v.size() == 2);
  CHECK(v[0] == RelationTriple{"Q1", "P31", "Q2"});
  CHECK(parse_triples("").empty());
  CHECK_THROWS_AS(parse_triples("Q1\tP31\n"), DataError);
  CHECK(parse_triples(serialize_triples(v)) == v);
}

TEST_CASE("split by category is an order preserving partition") {
  std::vector<MentionRecord> in(3);
  in[0] = {"a", "x", "", "Q1", Category::new_entity, 0};
  in[1] = {"b", "x", "", "Q2", Category::continual, 0};
  in[2] = {"c", "x", "", "Q3", Category::new_entity, 0};
  const auto s = split_by_category(in);
  REQUIRE(s.continual.size() == 1);
  REQUIRE(s.new_entities.size() == 2);
  CHECK(s.continual[0].gold_qid == "Q2");
  CHECK(s.new_entities[0].gold_qid == "Q1");
  CHECK(s.new_entities[1].gold_qid == "Q3");
  const auto e = split_by_category({});
  CHECK(e.continual.empty());
  CHECK(e.new_entities.empty());
}

TEST_CASE("entity index enumerates and round trips") {
  const auto idx = build_entity_index({{"Q1", "", "", 0}, {"Q2", "", "", 0}, {"Q3", "", "", 0}});
  CHECK(idx.size() == 3);
  CHECK(idx.row("Q2").value() == 1);
  CHECK_FALSE(idx.row("Q9").has_value());
  for (std::int64_t i = 0; i < idx.size(); ++i) CHECK(idx.row(idx.qid(i)).value() == i);
  const auto path = scratch("index.manifest");
  idx.save(path);
  CHECK(EntityIndex::load(path) == idx);
  CHECK(read_file(path) == idx.serialize());
  CHECK(build_entity_index({}).size() == 0);
  CHECK_THROWS_AS(build_entity_index({{"Q1", "", "", 0}, {"Q1", "", "", 0}}), DataError);
}

TEST_CASE("mentions with unknown gold are filtered") {
  const auto idx = build_entity_index({{"Q1", "", "", 0}});
  std::vector<MentionRecord> in(2);
  in[0].gold_qid = "Q1";
  in[0].mention = "a";
  in[1].gold_qid = "Q2";
  in[1].mention = "b";
  auto [kept, dropped] = filter_mentions(in, idx);
  CHECK(kept.size() == 1);
  CHECK(dropped == 1);
}

TEST_CASE("jsonl ingest accepts alternative keys") {
  const auto e = ingest_entities_jsonl(
      "{\"qid\":\"Q1\",\"title\":\"A\",\"text\":\"first\"}\n{\"wikidata_qid\":\"Q2\",\"wikipedia_title\":\"B\","
      "\"description\":\"second\"}\n",
      2020);
  REQUIRE(e.size() == 2);
  CHECK(e[1].qid == "Q2");
  CHECK(e[1].description == "second");
  const auto m = ingest_mentions_jsonl(
      "{\"context_left\":\"l\",\"mention\":\"m\",\"context_right\":\"r\",\"category\":\"new\",\"target_qid\":\"Q1\"}\n",
      2020);
  REQUIRE(m.size() == 1);
  CHECK(m[0].category == Category::new_entity);
  CHECK_THROWS_AS(ingest_mentions_jsonl("{\"mention\":\"m\"}\n", 2020), DataError);
}

TEST_CASE("basic tokenizer lowercases and splits punctuation") {
  const std::vector<std::string> want{"apple", "inc", ".", "'", "s", "x", "-", "1"};
  CHECK(basic_tokenize("Apple  Inc.'s\tx-1") == want);
}

TEST_CASE("vocabulary is specials then byte order") {
  const auto tok = Tokenizer::build({"b a", "C a"}, 16);
  const auto& v = tok.vocabulary();
  REQUIRE(v.size() == Tokenizer::kNumSpecial + 3);
  CHECK(v[0] == "[PAD]");
  CHECK(v[Tokenizer::kEnt] == "[ENT]");
  CHECK(v[7] == "a");
  CHECK(v[8] == "b");
  CHECK(v[9] == "c");
  CHECK(tok.id("zzz") == Tokenizer::kUnk);
}

TEST_CASE("render mention with empty contexts") {
  const auto tok = Tokenizer::build({"wildcats"}, 16);
  const MentionRecord m{"", "Wildcats", "", "Q1", Category::continual, 0};
  const TokenSeq want{Tokenizer::kCls, Tokenizer::kMentionStart, tok.id("wildcats"), Tokenizer::kMentionEnd,
                      Tokenizer::kSep};
  CHECK(tok.render_mention(m) == want);
}

TEST_CASE("render mention without overflow is unmodified") {
  const auto tok = Tokenizer::build({"a b c d e"}, 128);
  const MentionRecord m{"a b", "c", "d e", "Q1", Category::continual, 0};
  CHECK(tok.render_mention(m).size() == 9);
}

TEST_CASE("long contexts are trimmed toward the mention and stay balanced") {
  std::string left, right;
  for (int i = 0; i < 40; ++i) {
    left += "l" + std::to_string(i) + " ";
    right += "r" + std::to_string(i) + " ";
  }
  const auto tok = Tokenizer::build({left, right, "m"}, 17);
  const MentionRecord m{left, "m", right, "Q1", Category::continual, 0};
  const auto seq = tok.render_mention(m);
  CHECK(seq.size() == 17);
  std::size_t ms = 0, me = 0;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (seq[i] == Tokenizer::kMentionStart) ms = i;
    if (seq[i] == Tokenizer::kMentionEnd) me = i;
  }
  const auto kept_left = static_cast<long>(ms) - 1;
  const auto kept_right = static_cast<long>(seq.size()) - 2 - static_cast<long>(me);
  CHECK(std::abs(kept_left - kept_right) <= 1);
  // The token nearest the mention survives on each side.
  CHECK(seq[ms - 1] == tok.id("l39"));
  CHECK(seq[me + 1] == tok.id("r0"));
}

TEST_CASE("render entity template and tail truncation") {
  const auto tok = Tokenizer::build({"apple fruit of the tree"}, 8);
  const EntityRecord bare{"Q1", "Apple", "", 0};
  const TokenSeq want{Tokenizer::kCls, tok.id("apple"), Tokenizer::kEnt, Tokenizer::kSep};
  CHECK(tok.render_entity(bare) == want);
  const EntityRecord full{"Q1", "Apple", "fruit of the tree fruit of the tree", 0};
  const auto seq = tok.render_entity(full);
  CHECK(seq.size() == 8);
  CHECK(seq[3] == tok.id("fruit"));
  CHECK(seq.back() == Tokenizer::kSep);
  CHECK(tok.render_entity(full) == seq);
}
