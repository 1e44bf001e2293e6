#include <filesystem>
#include <fstream>
#include <variant>

#include "doctest.h"

#include "courtesy/corpus/dataset.hpp"
#include "courtesy/corpus/embeddings.hpp"
#include "courtesy/corpus/synthetic.hpp"
#include "courtesy/corpus/vocab.hpp"
#include "courtesy/errors.hpp"
#include "courtesy/numerics/optim.hpp"

using namespace courtesy;
using namespace courtesy::corpus;

namespace {

std::filesystem::path temp_file(const std::string& name, const std::string& contents) {
  auto dir = std::filesystem::temp_directory_path() / "courtesy_corpus_test";
  std::filesystem::create_directories(dir);
  auto path = dir / name;
  std::ofstream(path) << contents;
  return path;
}

}  // namespace

TEST_CASE("tokenize: lowercase and punctuation split") {
  CHECK(tokenize("Thanks.") == TokenSeq{"thanks", "."});
  CHECK(tokenize("").empty());
  CHECK(tokenize("   \t ").empty());
  CHECK(tokenize("Can you help?") == TokenSeq{"can", "you", "help", "?"});
  CHECK(tokenize("you're welcome.") == TokenSeq{"you're", "welcome", "."});
  CHECK(tokenize("<num> , <person> .") == TokenSeq{"<num>", ",", "<person>", "."});
}

TEST_CASE("tokenize round-trips already tokenized corpus lines") {
  for (const char* line : {"you 're sweet to say so .", "well , thanks . that 's . i appreciate that .",
                           "thank you , ma'am . um , may i ask what this is regarding ?",
                           "i do n't think so , sir .", "oh , well , excuse me all to hell ."}) {
    CHECK(join(tokenize(line)) == line);
  }
}

TEST_CASE("vocab: reserved ids, frequency order and unk substitution") {
  std::vector<TokenSeq> seqs{{"b", "a", "a"}, {"c", "b", "a"}};
  auto vocab = Vocab::build(seqs, 2);
  CHECK(vocab.size() == Vocab::kReserved + 2);
  CHECK(vocab.token(Vocab::kPad) == "<pad>");
  CHECK(vocab.token(Vocab::kLabel) == "<label>");
  CHECK(vocab.id("a") == Vocab::kReserved);
  CHECK(vocab.id("b") == Vocab::kReserved + 1);
  CHECK(vocab.id("c") == Vocab::kUnk);
  CHECK(vocab.encode({"a", "zzz", "b"}) == std::vector<int>{8, Vocab::kUnk, 9});
  int labels = 0;
  for (const auto& t : vocab.all_tokens()) labels += t == "<label>";
  CHECK(labels == 1);
}

TEST_CASE("vocab: encode/decode are inverse") {
  numerics::Rng rng(3);
  auto corpus = gen_synthetic(default_markers(), 1, 200, rng);
  auto seqs = all_sequences(corpus.triples);
  auto vocab = Vocab::build(seqs);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<int> ids;
    for (int k = 0; k < 12; ++k) ids.push_back(static_cast<int>(rng.below(vocab.size())));
    CHECK(vocab.encode(vocab.decode(ids)) == ids);
  }
  for (const auto& s : seqs) CHECK(vocab.decode(vocab.encode(s)) == s);
  // unk appears exactly for out-of-vocabulary tokens
  TokenSeq mixed{"movie", "qqq", "the"};
  auto ids = vocab.encode(mixed);
  for (std::size_t i = 0; i < mixed.size(); ++i) CHECK((ids[i] == Vocab::kUnk) == !vocab.contains(mixed[i]));
}

TEST_CASE("load_corpus: formats, sizes and errors") {
  auto triples = temp_file("t.jsonl", R"({"u1": "Hi there.", "u2": "Hello.", "u3": "Thanks."})" "\n");
  auto ds = load_corpus(triples, CorpusFormat::triples_jsonl);
  const auto& t = std::get<std::vector<DialogueTriple>>(ds);
  REQUIRE(t.size() == 1);
  CHECK(t[0].u3 == TokenSeq{"thanks", "."});

  auto polite = temp_file("p.jsonl", R"({"text":"thanks .","label":1})" "\n\n" R"({"text":"shut up .","label":0})" "\n");
  auto p = load_politeness(polite);
  REQUIRE(p.size() == 2);
  CHECK(p[0].label == Politeness::polite);
  CHECK(p[1].label == Politeness::rude);

  auto lm = temp_file("lm.txt", "thanks .\n\nyou 're welcome .\n");
  CHECK(load_lm_text(lm).size() == 2);

  auto bad = temp_file("bad.jsonl", R"({"text":"ok","label":1})" "\n" R"({"text":"ok","label":3})" "\n");
  try {
    load_politeness(bad);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
  }
  auto broken = temp_file("broken.jsonl", "{not json\n");
  CHECK_THROWS_AS(load_triples(broken), ParseError);
  auto empty_target = temp_file("empty.jsonl", R"({"u1":"a","u2":"b","u3":""})" "\n");
  CHECK_THROWS_AS(load_triples(empty_target), ParseError);
  CHECK_THROWS_AS(parse_format("csv"), UsageError);
}

TEST_CASE("shuffling is a pure function of (dataset, seed)") {
  CHECK(shuffled_order(50, 9) == shuffled_order(50, 9));
  CHECK(shuffled_order(50, 9) != shuffled_order(50, 10));
  auto order = shuffled_order(50, 9);
  std::sort(order.begin(), order.end());
  for (std::size_t i = 0; i < order.size(); ++i) CHECK(order[i] == i);
}

TEST_CASE("pretrained embeddings: copy, xavier fallback and pad") {
  std::vector<TokenSeq> seqs{{"thanks", "please", "sir"}};
  auto vocab = Vocab::build(seqs);
  const numerics::Index dim = 4;
  numerics::Rng rng(1);
  auto empty = temp_file("empty.vec", "");
  auto table = load_pretrained_embeddings(empty, vocab, dim, rng);
  CHECK(table.rows() == static_cast<numerics::Index>(vocab.size()));
  CHECK(table.row(Vocab::kPad).isZero());
  const float bound = static_cast<float>(numerics::xavier_bound(dim, static_cast<numerics::Index>(vocab.size())));
  CHECK(table.cwiseAbs().maxCoeff() <= bound);
  CHECK(table.row(vocab.id("sir")).norm() > 0);

  auto one = temp_file("one.vec", "2 4\nsir 1 2 3 4\nunknownword 9 9 9 9\n");
  numerics::Rng rng2(1);
  auto loaded = load_pretrained_embeddings(one, vocab, dim, rng2);
  CHECK(loaded.row(vocab.id("sir")) == (Eigen::RowVector4f() << 1, 2, 3, 4).finished());
  CHECK(loaded.row(vocab.id("thanks")) == table.row(vocab.id("thanks")));

  auto wrong = temp_file("wrong.vec", "sir 1 2 3\n");
  numerics::Rng rng3(1);
  CHECK_THROWS_AS(load_pretrained_embeddings(wrong, vocab, dim, rng3), UsageError);
}

TEST_CASE("synthetic corpus: sizes, marker rule and reproducibility") {
  numerics::Rng rng(5);
  auto none = gen_synthetic(default_markers(), 1, 0, rng);
  CHECK(none.triples.empty());
  CHECK(none.politeness.empty());

  const auto markers = default_markers();
  numerics::Rng a(7), b(7);
  auto first = gen_synthetic(markers, 3, 10000, a);
  auto second = gen_synthetic(markers, 3, 10000, b);
  REQUIRE(first.politeness.size() == 10000);
  REQUIRE(first.triples.size() == 10000);

  // Oracle: recount markers independently and compare with emitted labels.
  std::size_t mismatches = 0, polite = 0;
  for (const auto& u : first.politeness) {
    std::size_t p = 0, r = 0;
    for (const auto& t : u.text) {
      p += std::count(markers.polite.begin(), markers.polite.end(), t);
      r += std::count(markers.rude.begin(), markers.rude.end(), t);
    }
    const bool rule_polite = p >= 1 && r == 0;
    const bool rule_rude = r >= 1 && p == 0;
    if (u.label == Politeness::polite) {
      ++polite;
      mismatches += !rule_polite;
    } else {
      mismatches += !rule_rude;
    }
  }
  CHECK(mismatches == 0);
  CHECK(polite > 4700);
  CHECK(polite < 5300);

  std::size_t styles[3] = {0, 0, 0};
  for (const auto& t : first.triples) ++styles[static_cast<int>(marker_style(t.u3, markers))];
  for (auto count : styles) CHECK(count > 3000);

  for (std::size_t i = 0; i < first.triples.size(); ++i) {
    CHECK(first.triples[i].u3 == second.triples[i].u3);
  }

  MarkerSets overlap{{"please", "sir"}, {"sir"}};
  CHECK_THROWS_AS(gen_synthetic(overlap, 1, 5, rng), UsageError);
}
