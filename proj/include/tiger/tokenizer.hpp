#pragma once

#include "tiger/corpus.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace tiger {

using TokenId = std::int32_t;
using TokenSeq = std::vector<TokenId>;

/// Word-level tokenizer: ASCII lowercasing, whitespace splitting, and every
/// ASCII punctuation character as its own token.
std::vector<std::string> basic_tokenize(std::string_view text);

class Tokenizer {
 public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kUnk = 1;
  static constexpr TokenId kCls = 2;
  static constexpr TokenId kSep = 3;
  static constexpr TokenId kMentionStart = 4;
  static constexpr TokenId kMentionEnd = 5;
  static constexpr TokenId kEnt = 6;
  static constexpr TokenId kNumSpecial = 7;

  static const std::vector<std::string>& special_tokens();

  Tokenizer();
  /// Vocabulary = specials followed by the distinct corpus tokens in
  /// byte-lexicographic order.
  static Tokenizer build(const std::vector<std::string>& texts, int max_len = 128);
  static Tokenizer from_vocabulary(std::vector<std::string> vocab, int max_len);

  TokenId id(std::string_view token) const;
  const std::string& token(TokenId id) const { return vocab_.at(static_cast<std::size_t>(id)); }
  TokenSeq encode(std::string_view text) const;
  std::size_t vocab_size() const { return vocab_.size(); }
  const std::vector<std::string>& vocabulary() const { return vocab_; }
  int max_len() const { return max_len_; }

  /// [CLS] ctxt_l [M_s] mention [M_e] ctxt_r [SEP], at most max_len ids. The
  /// contexts are trimmed away from the mention, kept within one token of
  /// each other when both overflow.
  TokenSeq render_mention(const MentionRecord& m) const;
  /// [CLS] title [ENT] description [SEP], description truncated from the tail.
  TokenSeq render_entity(const EntityRecord& e) const;
  /// Same template as render_entity but over token strings.
  std::vector<std::string> render_entity_tokens(const EntityRecord& e) const;

 private:
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, TokenId> ids_;
  int max_len_ = 128;
};

/// Every text field that feeds a snapshot's vocabulary.
std::vector<std::string> vocabulary_corpus(const std::vector<EntityRecord>& entities,
                                           const std::vector<MentionRecord>& mentions);

}  // namespace tiger
