#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "courtesy/corpus/dataset.hpp"
#include "courtesy/corpus/vocab.hpp"
#include "courtesy/numerics/rng.hpp"
#include "courtesy/numerics/tensor.hpp"

namespace courtesy::dialogue {

using numerics::Index;

// Probability vector over the vocabulary for one decode step.
using VocabDistribution = numerics::Vector<double>;

// Token ids excluded from the loss and never emitted by decoding.
class TokenMask {
 public:
  TokenMask() = default;
  explicit TokenMask(std::size_t vocab_size) : blocked_(vocab_size, false) {}

  std::size_t size() const { return blocked_.size(); }
  bool blocked(int id) const { return id >= 0 && static_cast<std::size_t>(id) < blocked_.size() && blocked_[id]; }
  void block(int id);
  std::size_t count() const;

 private:
  std::vector<bool> blocked_;
};

// UNK plus every listed word that is in the vocabulary.
TokenMask loss_mask(const corpus::Vocab& vocab, const std::vector<std::string>& profanity);

// `mask` plus the structural tokens no response may contain (pad, unk,
// separator, label tokens).
TokenMask decode_mask(const TokenMask& mask, const corpus::Vocab& vocab);

inline constexpr std::size_t kDefaultMaxLen = 30;

// Encoder input. `scales`, when non-empty, multiplies each position's
// embedding (used to scale a prepended style label).
struct SourceInput {
  std::vector<int> ids;
  std::vector<float> scales;
};

struct TrainExample {
  SourceInput source;
  std::vector<int> target;  // ends in EOS
  std::vector<std::uint8_t> counted;  // 0 where the target token is masked out of the loss

  std::size_t counted_tokens() const;
};

// Tokens truncated to max_len - 1, then EOS.
std::vector<int> encode_target(const corpus::Vocab& vocab, const corpus::TokenSeq& tokens,
                               std::size_t max_len = kDefaultMaxLen);

// Context turns joined with the separator; each turn truncated to max_len.
SourceInput encode_context(const corpus::Vocab& vocab, std::span<const corpus::TokenSeq> turns,
                           std::size_t max_len = kDefaultMaxLen);

// Source u1 <sep> u2, target u3.
TrainExample make_example(const corpus::Vocab& vocab, const corpus::DialogueTriple& triple, const TokenMask& mask,
                          std::size_t max_len = kDefaultMaxLen);

// Teacher-forced target with mask flags computed from `mask`.
TrainExample make_example(const SourceInput& source, std::vector<int> target, const TokenMask& mask);

std::vector<TrainExample> make_examples(const corpus::Vocab& vocab, const std::vector<corpus::DialogueTriple>& triples,
                                        const TokenMask& mask, std::size_t max_len = kDefaultMaxLen);

enum class Scope { all_turns, last_turn };
Scope parse_scope(const std::string& name);

// Evaluation examples: last_turn gives (u1 <sep> u2 -> u3); all_turns also
// adds (u1 -> u2) for every triple.
std::vector<TrainExample> scoped_examples(const corpus::Vocab& vocab,
                                          const std::vector<corpus::DialogueTriple>& triples, const TokenMask& mask,
                                          Scope scope, std::size_t max_len = kDefaultMaxLen);

// Softmax of float logits computed in double with blocked ids forced to 0.
VocabDistribution masked_distribution(const numerics::Matrix<float>& logits_column, const TokenMask& mask);

enum class DecodeMode { greedy, sample };
DecodeMode parse_decode_mode(const std::string& name);

struct Decoded {
  std::vector<int> tokens;  // without the final EOS
  std::vector<VocabDistribution> steps;
  bool finished = false;    // EOS emitted before max_len
};

// Shared decode loop: `next` gives the distribution for the current prefix,
// `push` appends a chosen token. Greedy ties go to the lowest id.
Decoded run_decode(const std::function<VocabDistribution()>& next, const std::function<void(int)>& push,
                   DecodeMode mode, std::size_t max_len, numerics::Rng* rng);

std::size_t argmax(const VocabDistribution& p);

// Token-level Levenshtein distance.
std::size_t edit_distance(std::span<const int> hyp, std::span<const int> ref);

struct WerResult {
  double value = 0;
  std::size_t skipped = 0;  // empty references
};

// Sum of edit distances over sum of reference lengths.
WerResult wer(const std::vector<std::vector<int>>& hypotheses, const std::vector<std::vector<int>>& references);

}  // namespace courtesy::dialogue
