#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "courtesy/corpus/dataset.hpp"
#include "courtesy/numerics/rng.hpp"

namespace courtesy::corpus {

struct MarkerSets {
  std::vector<std::string> polite;
  std::vector<std::string> rude;
};

MarkerSets default_markers();

enum class MarkerStyle { rude, neutral, polite };

// Style implied by marker counts: polite if it has a polite marker and no rude
// one, rude in the mirror case, neutral otherwise (none, or both kinds).
MarkerStyle marker_style(const TokenSeq& tokens, const MarkerSets& markers);

struct SyntheticCorpus {
  std::vector<DialogueTriple> triples;
  std::vector<StyledUtterance> politeness;
};

// Marker-style stand-in for a dialogue corpus plus a politeness-labelled set.
//
// A small template grammar (topic nouns and adjectives chosen by
// `grammar_seed`) produces X/Y/X triples whose responses talk about the
// context's topic. Each response independently gets a polite, neutral or rude
// style (1/3 each) by attaching one or two markers from the matching set.
// The politeness set holds n utterances, each polite or rude with equal
// probability and labelled by the same marker rule.
//
// Overlapping marker sets are a UsageError.
SyntheticCorpus gen_synthetic(const MarkerSets& markers, std::uint64_t grammar_seed, std::size_t n,
                              numerics::Rng& rng);

}  // namespace courtesy::corpus
