#include <algorithm>
#include <cmath>
#include <map>

#include "doctest.h"
#include "retrieval_oracle.hpp"

#include "courtesy/corpus/synthetic.hpp"
#include "courtesy/errors.hpp"
#include "courtesy/numerics/rng.hpp"
#include "courtesy/retrieval/retrieval.hpp"

using namespace courtesy;
using namespace courtesy::retrieval;
using corpus::tokenize;
using courtesy::numerics::Rng;

using testing::DenseOracle;
using testing::random_doc;

TEST_CASE("tf-idf: hand computed three document table") {
  TfIdfIndex index({tokenize("the song is pretty"), tokenize("the movie is long"), tokenize("a movie")});
  CHECK(index.size() == 3);
  CHECK(index.terms() == std::vector<std::string>{"the", "song", "is", "pretty", "movie", "long", "a"});
  const double two = std::log(4.0 / 3.0), one = std::log(2.0);
  // df: the 2, song 1, is 2, pretty 1, movie 2, long 1, a 1
  const std::vector<std::vector<std::pair<int, double>>> expected = {
      {{0, two}, {1, one}, {2, two}, {3, one}},
      {{0, two}, {2, two}, {4, two}, {5, one}},
      {{4, two}, {6, one}},
  };
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& v = index.vector(i);
    REQUIRE(v.entries.size() == expected[i].size());
    double sq = 0;
    for (std::size_t k = 0; k < v.entries.size(); ++k) {
      CHECK(v.entries[k].first == expected[i][k].first);
      CHECK(v.entries[k].second == doctest::Approx(expected[i][k].second).epsilon(1e-15));
      sq += expected[i][k].second * expected[i][k].second;
    }
    CHECK(v.norm == doctest::Approx(std::sqrt(sq)).epsilon(1e-15));
  }

  auto hit = index.retrieve(tokenize("song pretty"));
  CHECK(hit.index == 0);
  const double q = std::sqrt(one * one + one * one);
  const double d0 = std::sqrt(2 * two * two + 2 * one * one);
  CHECK(hit.similarity == doctest::Approx((one * one + one * one) / (q * d0)).epsilon(1e-12));

  // Repeated terms count.
  auto v = index.vectorize(tokenize("movie movie long"));
  CHECK(v.entries == std::vector<std::pair<int, double>>{{4, 2 * two}, {5, one}});
}

TEST_CASE("retrieve: identity, no overlap and tie rule") {
  TfIdfIndex index({tokenize("hello there"), tokenize("good day to you"), tokenize("hello there"), tokenize("x y")});
  auto same = index.retrieve(tokenize("good day to you"));
  CHECK(same.index == 1);
  CHECK(same.similarity == doctest::Approx(1.0));
  auto none = index.retrieve(tokenize("completely unrelated"));
  CHECK(none.index == 0);
  CHECK(none.similarity == 0.0);
  CHECK(index.retrieve(tokenize("hello")).index == 0);  // duplicate at 2 loses the tie
  CHECK(index.retrieve({}).similarity == 0.0);
}

TEST_CASE("tf-idf: a term in every document has zero weight") {
  TfIdfIndex single({tokenize("only one")});
  CHECK(single.vector(0).entries.empty());
  CHECK(single.vector(0).norm == 0.0);
  auto r = single.retrieve(tokenize("only one"));
  CHECK(r.index == 0);
  CHECK(r.similarity == 0.0);
}

TEST_CASE("cosine properties") {
  Rng rng(4);
  std::vector<TokenSeq> docs;
  for (int i = 0; i < 60; ++i) docs.push_back(random_doc(rng, 30, 8));
  TfIdfIndex index(docs);
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const auto& a = index.vector(i);
    if (a.norm > 0) CHECK(cosine(a, a) == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t j = 0; j < docs.size(); ++j) {
      const double s = cosine(a, index.vector(j));
      CHECK(s == cosine(index.vector(j), a));
      CHECK(s >= 0.0);
      CHECK(s <= 1.0);
    }
  }
}

TEST_CASE("retrieve equals brute-force argmax, ties included") {
  Rng rng(11);
  std::vector<TokenSeq> docs;
  for (int i = 0; i < 1000; ++i) {
    // Every tenth candidate repeats an earlier one so exact ties occur.
    if (i % 10 == 9) {
      docs.push_back(docs[rng.below(static_cast<std::uint64_t>(i))]);
    } else {
      docs.push_back(random_doc(rng, 120, 6));
    }
  }
  TfIdfIndex index(docs);
  DenseOracle oracle(docs);
  int ties = 0;
  for (int q = 0; q < 200; ++q) {
    auto query = q % 4 == 0 ? docs[rng.below(docs.size())] : random_doc(rng, 140, 10);
    auto got = index.retrieve(query);
    auto [best, sim] = oracle.argmax(query);
    CHECK(got.index == best);
    CHECK(got.similarity == sim);
    CHECK(got.response == docs[best]);
    for (std::size_t i = best + 1; i < docs.size(); ++i) ties += docs[i] == docs[best] ? 1 : 0;
  }
  CHECK(ties > 0);
}

TEST_CASE("build order is stable and deterministic") {
  std::vector<TokenSeq> docs = {tokenize("a b"), tokenize("b c"), tokenize("c d e")};
  TfIdfIndex x(docs), y(docs);
  CHECK(x.terms() == y.terms());
  for (std::size_t i = 0; i < docs.size(); ++i) CHECK(x.vector(i).entries == y.vector(i).entries);
  auto back = TfIdfIndex::from_json(x.to_json());
  CHECK(back.candidates() == docs);
  for (std::size_t i = 0; i < docs.size(); ++i) CHECK(back.vector(i).entries == x.vector(i).entries);
  CHECK_THROWS_AS(build_index({}), UsageError);
}

TEST_CASE("generic-10 responder") {
  const std::vector<std::string> expected = {
      "thanks.", "can you help?", "can you clarify?", "no problem.", "you're welcome.",
      "interesting question.", "thanks for the answer.", "could you help please?", "can you elaborate?", "nice.",
  };
  REQUIRE(kGeneric10.size() == 10);
  for (std::size_t i = 0; i < 10; ++i) CHECK(std::string(kGeneric10[i]) == expected[i]);
  auto index = generic10_index();
  CHECK(index.size() == 10);
  CHECK(corpus::join(index.candidates()[0]) == "thanks .");
  CHECK(corpus::join(index.candidates()[1]) == "can you help ?");
  CHECK(corpus::join(index.retrieve(tokenize("could you elaborate on that")).response) == "can you elaborate ?");
}

TEST_CASE("context document joins the last two turns") {
  CHECK(context_document(tokenize("a b"), tokenize("c")) == tokenize("a b c"));
  CHECK(context_document(std::vector<TokenSeq>{tokenize("x"), tokenize("a b"), tokenize("c")}) == tokenize("a b c"));
  CHECK(context_document(std::vector<TokenSeq>{tokenize("solo")}) == tokenize("solo"));
}

TEST_CASE("classifier filter keeps only candidates above the threshold") {
  Rng rng(2);
  auto data = corpus::gen_synthetic(corpus::default_markers(), 1, 400, rng);
  auto vocab = corpus::Vocab::build(corpus::all_sequences(data.politeness));
  classifier::ClassifierConfig cfg;
  cfg.embedding_dim = 12;
  cfg.hidden = 8;
  cfg.filters = 6;
  cfg.epochs = 6;
  cfg.lr = 0.005;
  cfg.batch_size = 16;
  Rng train_rng(3);
  auto clf = classifier::train_classifier(data.politeness, cfg, vocab, train_rng);
  std::vector<TokenSeq> texts;
  for (const auto& u : data.politeness) texts.push_back(u.text);
  auto index = build_index(texts, &clf, 0.8);
  std::size_t expected = 0;
  for (const auto& t : texts) expected += classifier::score(clf, t).value() > 0.8 ? 1 : 0;
  CHECK(index.size() == expected);
  for (const auto& c : index.candidates()) CHECK(classifier::score(clf, c).value() > 0.8);
  CHECK_THROWS_AS(build_index(texts, &clf, 1.0), UsageError);
}
