#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "courtesy/corpus/vocab.hpp"

namespace courtesy::corpus {

// (u1, u2, u3) with speakers X, Y, X. (u1, u2) is the context, u3 the target.
struct DialogueTriple {
  TokenSeq u1;
  TokenSeq u2;
  TokenSeq u3;
};

enum class Politeness : int { rude = 0, polite = 1 };

struct StyledUtterance {
  TokenSeq text;
  Politeness label = Politeness::rude;
};

enum class CorpusFormat { triples_jsonl, politeness_jsonl, lm_text };

CorpusFormat parse_format(std::string_view name);

using Dataset = std::variant<std::vector<DialogueTriple>, std::vector<StyledUtterance>, std::vector<TokenSeq>>;

// Reads one of the three on-disk formats:
//   triples-jsonl     {"u1": str, "u2": str, "u3": str} per line
//   politeness-jsonl  {"text": str, "label": 0|1} per line
//   lm-text           one utterance per line
// Text fields are run through tokenize(). Blank lines are skipped.
// Malformed lines raise ParseError naming the line number.
Dataset load_corpus(const std::filesystem::path& path, CorpusFormat format);

std::vector<DialogueTriple> load_triples(const std::filesystem::path& path);
std::vector<StyledUtterance> load_politeness(const std::filesystem::path& path);
std::vector<TokenSeq> load_lm_text(const std::filesystem::path& path);

void save_triples(const std::filesystem::path& path, const std::vector<DialogueTriple>& triples);
void save_politeness(const std::filesystem::path& path, const std::vector<StyledUtterance>& utterances);
void save_lm_text(const std::filesystem::path& path, const std::vector<TokenSeq>& utterances);

// One non-reserved token per line, in id order.
void save_vocab(const std::filesystem::path& path, const Vocab& vocab);
Vocab load_vocab(const std::filesystem::path& path);

// Plain word list, one entry per line; '#' starts a comment.
std::vector<std::string> load_word_list(const std::filesystem::path& path);

// A permutation of [0, n) that depends only on (n, seed).
std::vector<std::size_t> shuffled_order(std::size_t n, std::uint64_t seed);

template <typename T>
std::vector<T> shuffled(const std::vector<T>& items, std::uint64_t seed) {
  std::vector<T> out;
  out.reserve(items.size());
  for (std::size_t i : shuffled_order(items.size(), seed)) out.push_back(items[i]);
  return out;
}

// Every token sequence in a dataset, for vocabulary building.
std::vector<TokenSeq> all_sequences(const std::vector<DialogueTriple>& triples);
std::vector<TokenSeq> all_sequences(const std::vector<StyledUtterance>& utterances);

}  // namespace courtesy::corpus
