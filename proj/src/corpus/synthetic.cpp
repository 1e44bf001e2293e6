#include "courtesy/corpus/synthetic.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <string_view>

#include "courtesy/errors.hpp"

namespace courtesy::corpus {

namespace {

constexpr std::array<std::string_view, 24> kTopics = {
    "movie", "song",  "book",   "game",  "car",    "house",  "dog",    "city",
    "dinner", "party", "show",  "plan",  "job",    "trip",   "garden", "story",
    "coffee", "boat",  "letter", "dress", "school", "horse", "ring",   "photo"};

constexpr std::array<std::string_view, 16> kAdjectives = {"good", "bad",  "long",  "new",    "old",   "big",
                                                          "small", "pretty", "loud", "funny", "quiet", "cheap",
                                                          "strange", "nice", "cold", "late"};

// {t} = topic, {a} = adjective
constexpr std::array<std::string_view, 5> kFirstTurn = {"what do you think of the {t} ?", "did you see the {t} ?",
                                                        "tell me about the {t} .", "how was the {t} ?",
                                                        "where is the {t} ?"};

constexpr std::array<std::string_view, 4> kSecondTurn = {"the {t} was {a} .", "i think the {t} is {a} .",
                                                         "my {t} is {a} .", "the {t} looked {a} to me ."};

constexpr std::array<std::string_view, 5> kResponse = {"the {t} is {a}", "i agree the {t} was {a}",
                                                       "i never liked that {t}", "we should see the {t} again",
                                                       "that {t} is not {a}"};

// Templates are already tokenized with single spaces.
std::vector<std::string> tokenize_words(std::string_view pattern) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < pattern.size()) {
    std::size_t end = pattern.find(' ', start);
    if (end == std::string_view::npos) end = pattern.size();
    if (end > start) out.emplace_back(pattern.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

struct Grammar {
  std::vector<std::string> topics;
  std::vector<std::string> adjectives;
};

Grammar make_grammar(std::uint64_t grammar_seed) {
  numerics::Rng rng(grammar_seed);
  Grammar g;
  std::vector<std::string> topics(kTopics.begin(), kTopics.end());
  std::vector<std::string> adjectives(kAdjectives.begin(), kAdjectives.end());
  rng.shuffle(std::span<std::string>(topics));
  rng.shuffle(std::span<std::string>(adjectives));
  g.topics.assign(topics.begin(), topics.begin() + 12);
  g.adjectives.assign(adjectives.begin(), adjectives.begin() + 8);
  return g;
}

TokenSeq fill(std::string_view pattern, const std::string& topic, const std::string& adjective) {
  TokenSeq out;
  for (auto& word : tokenize_words(pattern)) {
    if (word == "{t}") word = topic;
    if (word == "{a}") word = adjective;
    out.push_back(std::move(word));
  }
  return out;
}

// Wraps a content clause with one or two markers: "m , <content> ." or
// "<content> , m ." or both.
TokenSeq stylize(TokenSeq content, const std::vector<std::string>& markers, numerics::Rng& rng) {
  const bool two = rng.bernoulli(0.3);
  const bool prefix = two || rng.bernoulli(0.5);
  const bool suffix = two || !prefix;
  TokenSeq out;
  if (prefix) {
    out.push_back(markers[rng.below(markers.size())]);
    out.emplace_back(",");
  }
  out.insert(out.end(), content.begin(), content.end());
  if (suffix) {
    out.emplace_back(",");
    out.push_back(markers[rng.below(markers.size())]);
  }
  out.emplace_back(".");
  return out;
}

template <std::size_t N>
std::string_view pick(const std::array<std::string_view, N>& options, numerics::Rng& rng) {
  return options[rng.below(N)];
}

}  // namespace

MarkerSets default_markers() {
  return {{"please", "thanks", "sir", "kindly", "appreciate", "gracious", "grateful", "welcome"},
          {"idiot", "stupid", "shut", "whatever", "dumb", "jerk", "moron", "lousy"}};
}

MarkerStyle marker_style(const TokenSeq& tokens, const MarkerSets& markers) {
  bool polite = false, rude = false;
  for (const auto& t : tokens) {
    polite = polite || std::find(markers.polite.begin(), markers.polite.end(), t) != markers.polite.end();
    rude = rude || std::find(markers.rude.begin(), markers.rude.end(), t) != markers.rude.end();
  }
  if (polite && !rude) return MarkerStyle::polite;
  if (rude && !polite) return MarkerStyle::rude;
  return MarkerStyle::neutral;
}

SyntheticCorpus gen_synthetic(const MarkerSets& markers, std::uint64_t grammar_seed, std::size_t n,
                              numerics::Rng& rng) {
  if (markers.polite.empty() || markers.rude.empty()) throw UsageError("gen_synthetic: marker sets must be non-empty");
  std::set<std::string> polite(markers.polite.begin(), markers.polite.end());
  for (const auto& r : markers.rude) {
    if (polite.count(r) != 0) throw UsageError("gen_synthetic: marker '" + r + "' is both polite and rude");
  }
  const Grammar g = make_grammar(grammar_seed);
  auto topic = [&] { return g.topics[rng.below(g.topics.size())]; };
  auto adjective = [&] { return g.adjectives[rng.below(g.adjectives.size())]; };

  SyntheticCorpus out;
  out.triples.reserve(n);
  out.politeness.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string t = topic();
    const std::string a1 = adjective();
    const std::string a2 = adjective();
    DialogueTriple triple;
    triple.u1 = fill(pick(kFirstTurn, rng), t, a1);
    triple.u2 = fill(pick(kSecondTurn, rng), t, a1);
    TokenSeq content = fill(pick(kResponse, rng), t, a2);
    switch (rng.below(3)) {
      case 0:
        triple.u3 = stylize(std::move(content), markers.rude, rng);
        break;
      case 1:
        content.emplace_back(".");
        triple.u3 = std::move(content);
        break;
      default:
        triple.u3 = stylize(std::move(content), markers.polite, rng);
        break;
    }
    out.triples.push_back(std::move(triple));
  }
  for (std::size_t i = 0; i < n; ++i) {
    const bool is_polite = rng.bernoulli(0.5);
    const std::string t = topic();
    const std::string a = adjective();
    TokenSeq content = rng.bernoulli(0.5) ? fill(pick(kResponse, rng), t, a) : fill(pick(kSecondTurn, rng), t, a);
    if (content.back() == ".") content.pop_back();
    out.politeness.push_back(
        {stylize(std::move(content), is_polite ? markers.polite : markers.rude, rng),
         is_polite ? Politeness::polite : Politeness::rude});
  }
  return out;
}

}  // namespace courtesy::corpus
