#include "tiger/tokenizer.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <stdexcept>

namespace tiger {

std::vector<std::string> basic_tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  for (unsigned char c : text) {
    if (c < 0x80 && std::isspace(c)) {
      flush();
    } else if (c < 0x80 && std::ispunct(c)) {
      flush();
      out.emplace_back(1, static_cast<char>(c));
    } else {
      cur += static_cast<char>(c < 0x80 ? std::tolower(c) : c);
    }
  }
  flush();
  return out;
}

const std::vector<std::string>& Tokenizer::special_tokens() {
  static const std::vector<std::string> specials = {"[PAD]", "[UNK]", "[CLS]", "[SEP]", "[M_s]", "[M_e]", "[ENT]"};
  return specials;
}

Tokenizer::Tokenizer() : vocab_(special_tokens()) {
  for (std::size_t i = 0; i < vocab_.size(); ++i) ids_.emplace(vocab_[i], static_cast<TokenId>(i));
}

Tokenizer Tokenizer::from_vocabulary(std::vector<std::string> vocab, int max_len) {
  if (max_len < 5) throw std::invalid_argument("tokenizer: max_len must be at least 5");
  const auto& specials = special_tokens();
  if (vocab.size() < specials.size() || !std::equal(specials.begin(), specials.end(), vocab.begin())) {
    throw std::invalid_argument("tokenizer: vocabulary must start with the special tokens");
  }
  Tokenizer t;
  t.vocab_ = std::move(vocab);
  t.max_len_ = max_len;
  t.ids_.clear();
  for (std::size_t i = 0; i < t.vocab_.size(); ++i) {
    if (!t.ids_.emplace(t.vocab_[i], static_cast<TokenId>(i)).second) {
      throw std::invalid_argument("tokenizer: duplicate vocabulary entry " + t.vocab_[i]);
    }
  }
  return t;
}

Tokenizer Tokenizer::build(const std::vector<std::string>& texts, int max_len) {
  std::set<std::string> distinct;
  for (const auto& text : texts) {
    for (auto& tok : basic_tokenize(text)) distinct.insert(std::move(tok));
  }
  std::vector<std::string> vocab = special_tokens();
  for (const auto& s : special_tokens()) distinct.erase(s);
  vocab.insert(vocab.end(), distinct.begin(), distinct.end());
  return from_vocabulary(std::move(vocab), max_len);
}

TokenId Tokenizer::id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnk : it->second;
}

TokenSeq Tokenizer::encode(std::string_view text) const {
  TokenSeq out;
  for (const auto& tok : basic_tokenize(text)) out.push_back(id(tok));
  return out;
}

TokenSeq Tokenizer::render_mention(const MentionRecord& m) const {
  TokenSeq left = encode(m.context_left);
  TokenSeq mention = encode(m.mention);
  TokenSeq right = encode(m.context_right);
  const std::size_t cap = static_cast<std::size_t>(max_len_) - 4;
  if (mention.size() > cap) mention.resize(cap);
  const std::size_t budget = cap - mention.size();

  std::size_t keep_left = std::min(left.size(), budget / 2);
  std::size_t keep_right = std::min(right.size(), budget - keep_left);
  keep_left = std::min(left.size(), budget - keep_right);

  TokenSeq out;
  out.reserve(4 + mention.size() + keep_left + keep_right);
  out.push_back(kCls);
  out.insert(out.end(), left.end() - static_cast<std::ptrdiff_t>(keep_left), left.end());
  out.push_back(kMentionStart);
  out.insert(out.end(), mention.begin(), mention.end());
  out.push_back(kMentionEnd);
  out.insert(out.end(), right.begin(), right.begin() + static_cast<std::ptrdiff_t>(keep_right));
  out.push_back(kSep);
  return out;
}

std::vector<std::string> Tokenizer::render_entity_tokens(const EntityRecord& e) const {
  auto title = basic_tokenize(e.title);
  auto desc = basic_tokenize(e.description);
  const std::size_t cap = static_cast<std::size_t>(max_len_) - 3;
  if (title.size() > cap) title.resize(cap);
  const std::size_t room = cap - title.size();
  if (desc.size() > room) desc.resize(room);
  const auto& sp = special_tokens();
  std::vector<std::string> out;
  out.reserve(3 + title.size() + desc.size());
  out.push_back(sp[kCls]);
  out.insert(out.end(), title.begin(), title.end());
  out.push_back(sp[kEnt]);
  out.insert(out.end(), desc.begin(), desc.end());
  out.push_back(sp[kSep]);
  return out;
}

TokenSeq Tokenizer::render_entity(const EntityRecord& e) const {
  auto toks = render_entity_tokens(e);
  TokenSeq out;
  out.reserve(toks.size());
  out.push_back(kCls);
  for (std::size_t i = 1; i + 1 < toks.size(); ++i) out.push_back(toks[i] == special_tokens()[kEnt] ? kEnt : id(toks[i]));
  out.push_back(kSep);
  return out;
}

std::vector<std::string> vocabulary_corpus(const std::vector<EntityRecord>& entities,
                                           const std::vector<MentionRecord>& mentions) {
  std::vector<std::string> texts;
  texts.reserve(2 * entities.size() + 3 * mentions.size());
  for (const auto& e : entities) {
    texts.push_back(e.title);
    texts.push_back(e.description);
  }
  for (const auto& m : mentions) {
    texts.push_back(m.context_left);
    texts.push_back(m.mention);
    texts.push_back(m.context_right);
  }
  return texts;
}

}  // namespace tiger
