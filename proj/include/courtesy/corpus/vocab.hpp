#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace courtesy::corpus {

using TokenSeq = std::vector<std::string>;

// Lowercases, splits on whitespace, and splits ASCII punctuation into separate
// tokens. Apostrophes stay inside words ("'re", "ma'am") and placeholder
// tokens written as <name> are kept whole.
TokenSeq tokenize(std::string_view raw);

std::string join(const TokenSeq& tokens);

// Token <-> id map. Ids below kReserved are fixed:
//   0 <pad>  1 <unk>  2 </s>  3 <sep>  4 <label>
//   5 <label:rude>  6 <label:neutral>  7 <label:polite>
// </s> doubles as the decoder start symbol. <label> is the single scalable
// politeness label; the three bin labels serve the discrete variant.
class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kEos = 2;
  static constexpr int kSep = 3;
  static constexpr int kLabel = 4;
  static constexpr int kLabelRude = 5;
  static constexpr int kLabelNeutral = 6;
  static constexpr int kLabelPolite = 7;
  static constexpr int kReserved = 8;

  Vocab();

  // The `max_size` most frequent tokens across all sequences (ties broken
  // lexicographically); everything else maps to <unk>. 0 means unlimited.
  static Vocab build(std::span<const TokenSeq> sequences, std::size_t max_size = 10000);

  // Non-reserved tokens in id order (ids kReserved, kReserved+1, ...).
  static Vocab from_tokens(std::span<const std::string> tokens);

  std::size_t size() const { return tokens_.size(); }
  bool contains(std::string_view token) const;
  int id(std::string_view token) const;  // <unk> when absent
  const std::string& token(int id) const;

  std::vector<int> encode(const TokenSeq& tokens) const;
  TokenSeq decode(std::span<const int> ids) const;

  // Tokens from kReserved on.
  std::vector<std::string> regular_tokens() const;
  const std::vector<std::string>& all_tokens() const { return tokens_; }

  static bool is_reserved(int id) { return id >= 0 && id < kReserved; }

 private:
  void add(std::string token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

}  // namespace courtesy::corpus
