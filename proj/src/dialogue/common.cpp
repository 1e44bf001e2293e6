#include "courtesy/dialogue/common.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "courtesy/errors.hpp"

namespace courtesy::dialogue {

using corpus::Vocab;

void TokenMask::block(int id) {
  if (id < 0 || static_cast<std::size_t>(id) >= blocked_.size()) throw UsageError("TokenMask: id out of range");
  blocked_[static_cast<std::size_t>(id)] = true;
}

std::size_t TokenMask::count() const { return static_cast<std::size_t>(std::count(blocked_.begin(), blocked_.end(), true)); }

TokenMask loss_mask(const Vocab& vocab, const std::vector<std::string>& profanity) {
  TokenMask mask(vocab.size());
  mask.block(Vocab::kUnk);
  for (const auto& word : profanity) {
    if (vocab.contains(word)) mask.block(vocab.id(word));
  }
  return mask;
}

TokenMask decode_mask(const TokenMask& mask, const Vocab& vocab) {
  if (mask.size() != 0 && mask.size() != vocab.size()) throw DimensionError("decode_mask: mask/vocab size");
  TokenMask out = mask.size() == 0 ? TokenMask(vocab.size()) : mask;
  for (int id : {Vocab::kPad, Vocab::kUnk, Vocab::kSep, Vocab::kLabel, Vocab::kLabelRude, Vocab::kLabelNeutral,
                 Vocab::kLabelPolite}) {
    out.block(id);
  }
  return out;
}

std::size_t TrainExample::counted_tokens() const {
  return static_cast<std::size_t>(std::count(counted.begin(), counted.end(), std::uint8_t{1}));
}

std::vector<int> encode_target(const Vocab& vocab, const corpus::TokenSeq& tokens, std::size_t max_len) {
  if (max_len < 1) throw UsageError("max_len must be >= 1");
  std::vector<int> ids = vocab.encode(tokens);
  if (ids.size() > max_len - 1) ids.resize(max_len - 1);
  ids.push_back(Vocab::kEos);
  return ids;
}

SourceInput encode_context(const Vocab& vocab, std::span<const corpus::TokenSeq> turns, std::size_t max_len) {
  SourceInput src;
  for (std::size_t k = 0; k < turns.size(); ++k) {
    if (k > 0) src.ids.push_back(Vocab::kSep);
    auto ids = vocab.encode(turns[k]);
    if (ids.size() > max_len) ids.resize(max_len);
    src.ids.insert(src.ids.end(), ids.begin(), ids.end());
  }
  if (src.ids.empty()) throw UsageError("empty source context");
  return src;
}

TrainExample make_example(const SourceInput& source, std::vector<int> target, const TokenMask& mask) {
  if (target.empty()) throw UsageError("empty target");
  TrainExample ex;
  ex.source = source;
  ex.counted.reserve(target.size());
  for (int id : target) ex.counted.push_back(mask.blocked(id) ? 0 : 1);
  ex.target = std::move(target);
  return ex;
}

TrainExample make_example(const Vocab& vocab, const corpus::DialogueTriple& triple, const TokenMask& mask,
                          std::size_t max_len) {
  const corpus::TokenSeq turns[] = {triple.u1, triple.u2};
  return make_example(encode_context(vocab, turns, max_len), encode_target(vocab, triple.u3, max_len), mask);
}

std::vector<TrainExample> make_examples(const Vocab& vocab, const std::vector<corpus::DialogueTriple>& triples,
                                        const TokenMask& mask, std::size_t max_len) {
  std::vector<TrainExample> out;
  out.reserve(triples.size());
  for (const auto& t : triples) out.push_back(make_example(vocab, t, mask, max_len));
  return out;
}

Scope parse_scope(const std::string& name) {
  if (name == "all-turns") return Scope::all_turns;
  if (name == "last-turn") return Scope::last_turn;
  throw UsageError("unknown scope '" + name + "' (all-turns | last-turn)");
}

std::vector<TrainExample> scoped_examples(const Vocab& vocab, const std::vector<corpus::DialogueTriple>& triples,
                                          const TokenMask& mask, Scope scope, std::size_t max_len) {
  std::vector<TrainExample> out;
  for (const auto& t : triples) {
    if (scope == Scope::all_turns) {
      const corpus::TokenSeq first[] = {t.u1};
      out.push_back(make_example(encode_context(vocab, first, max_len), encode_target(vocab, t.u2, max_len), mask));
    }
    out.push_back(make_example(vocab, t, mask, max_len));
  }
  return out;
}

VocabDistribution masked_distribution(const numerics::Matrix<float>& logits_column, const TokenMask& mask) {
  const Index n = logits_column.rows();
  if (logits_column.cols() != 1) throw DimensionError("masked_distribution: expected one column");
  if (mask.size() != 0 && static_cast<Index>(mask.size()) != n) throw DimensionError("masked_distribution: mask size");
  double top = -std::numeric_limits<double>::infinity();
  for (Index i = 0; i < n; ++i) {
    if (!mask.blocked(static_cast<int>(i))) top = std::max(top, static_cast<double>(logits_column(i, 0)));
  }
  if (!std::isfinite(top)) throw UsageError("masked_distribution: every token is masked");
  VocabDistribution p(n);
  double total = 0;
  for (Index i = 0; i < n; ++i) {
    p(i) = mask.blocked(static_cast<int>(i)) ? 0.0 : std::exp(static_cast<double>(logits_column(i, 0)) - top);
    total += p(i);
  }
  return p / total;
}

DecodeMode parse_decode_mode(const std::string& name) {
  if (name == "greedy") return DecodeMode::greedy;
  if (name == "sample") return DecodeMode::sample;
  throw UsageError("unknown decode mode '" + name + "' (greedy | sample)");
}

std::size_t argmax(const VocabDistribution& p) {
  Index best = 0;
  for (Index i = 1; i < p.size(); ++i) {
    if (p(i) > p(best)) best = i;
  }
  return static_cast<std::size_t>(best);
}

Decoded run_decode(const std::function<VocabDistribution()>& next, const std::function<void(int)>& push,
                   DecodeMode mode, std::size_t max_len, numerics::Rng* rng) {
  if (max_len < 1) throw UsageError("decode: max_len must be >= 1");
  if (mode == DecodeMode::sample && rng == nullptr) throw UsageError("decode: sample mode needs an rng");
  Decoded out;
  for (std::size_t t = 0; t < max_len; ++t) {
    VocabDistribution p = next();
    const int token = static_cast<int>(mode == DecodeMode::greedy ? argmax(p) : rng->categorical(p));
    out.steps.push_back(std::move(p));
    if (token == Vocab::kEos) {
      out.finished = true;
      break;
    }
    out.tokens.push_back(token);
    push(token);
  }
  return out;
}

std::size_t edit_distance(std::span<const int> hyp, std::span<const int> ref) {
  std::vector<std::size_t> row(ref.size() + 1);
  for (std::size_t j = 0; j <= ref.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= hyp.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= ref.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (hyp[i - 1] == ref[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[ref.size()];
}

WerResult wer(const std::vector<std::vector<int>>& hypotheses, const std::vector<std::vector<int>>& references) {
  if (hypotheses.size() != references.size()) throw UsageError("wer: hypothesis/reference count mismatch");
  WerResult r;
  std::size_t errors = 0, length = 0;
  for (std::size_t k = 0; k < references.size(); ++k) {
    if (references[k].empty()) {
      ++r.skipped;
      continue;
    }
    errors += edit_distance(hypotheses[k], references[k]);
    length += references[k].size();
  }
  r.value = length == 0 ? 0.0 : static_cast<double>(errors) / static_cast<double>(length);
  return r;
}

}  // namespace courtesy::dialogue
